#pragma once

#include "gft/calculus.hpp"
#include "gft/expr.hpp"
#include "gft/matrix.hpp"
#include "gft/symbols.hpp"

namespace gfttest {

using namespace gft;

// Standard declarations shared by most engine tests: the fermionic model
// fields on both charts plus a few spare symbols.
struct Fixture {
  Context ctx;
  Assumptions none;
  Assumptions positive;

  Fixture() {
    ctx.declare_field("theta", Parity::Even, kChartTx);
    ctx.declare_field("theta_nr", Parity::Even, kChartTx);
    ctx.declare_field("u", Parity::Odd, kChartTx);
    ctx.declare_field("v", Parity::Odd, kChartTx);
    ctx.declare_field("Pi", Parity::Even, kChartLc);
    ctx.declare_field("A", Parity::Even, kChartTx);
    ctx.declare_field("B", Parity::Even, kChartTx);
    ctx.declare_param("eta", Parity::Odd);
    ctx.declare_param("eps", Parity::Even, /*marker=*/true);
    ctx.declare_param("a_const", Parity::Even);

    positive.declare_positive(ctx.atom("Pi", kChartLc));
    positive.declare_positive(ctx.atom("theta", kChartLc, 0, 1));  // theta_-
  }

  Expr atom(const char* name, int d0 = 0, int d1 = 0) const {
    return Expr::from_atom(ctx.atom(name, kChartNone, d0, d1));
  }
  Expr lc_atom(const char* name, int dplus = 0, int dminus = 0) const {
    return Expr::from_atom(ctx.atom(name, kChartLc, dplus, dminus));
  }
  Expr num(long long n) const { return Expr::integer(n); }
  Expr frac(long long n, long long d) const { return Expr::rational(Rational(n, d)); }
};

inline Expr sq(const Expr& e) { return mul(e, e); }

// Full fermionic model: Cartesian parameterization, gauge-fixed spinor and
// the square-root Lagrangian assembled from the induced metric.
struct ModelFixture : Fixture {
  Expr th(int dt = 0, int dx = 0) const { return atom("theta", dt, dx); }
  Expr uu(int dt, int dx) const { return mul(atom("u"), atom("u", dt, dx)); }

  Parameterization cartesian() const {
    return Parameterization{{scale(atom("t"), Coeff(1), 2), atom("x"),
                             scale(atom("theta"), Coeff(1), -2)}};
  }
  Spinor gauge_fixed() const { return gauge_project(Spinor{atom("u"), atom("v")}); }

  // L = -c sqrt(g) - c * (supplementary term)
  Expr fermionic_bi_lagrangian() const {
    Expr det = det_g(induced_metric(cartesian(), gauge_fixed()));
    Expr root = pow_expr(det, Rational(1, 2), none);
    return sub(neg(scale(root, Coeff(1), 2)),
               scale(wz_term(cartesian(), gauge_fixed()), Coeff(1), 2));
  }
};

}  // namespace gfttest
