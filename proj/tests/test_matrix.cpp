#include <catch2/catch_amalgamated.hpp>

#include "gft/matrix.hpp"
#include "gft/oracle.hpp"
#include "helpers.hpp"

using namespace gft;
using gfttest::Fixture;
using gfttest::sq;

namespace {

struct GammaFixture : Fixture {
  Expr th(int dt = 0, int dx = 0) const { return atom("theta", dt, dx); }
  Expr uu(int dt, int dx) const { return mul(atom("u"), atom("u", dt, dx)); }

  Parameterization cartesian() const {
    return Parameterization{{scale(atom("t"), Coeff(1), 2), atom("x"),
                             scale(atom("theta"), Coeff(1), -2)}};
  }
  Spinor gauge_fixed() const {
    return gauge_project(Spinor{atom("u"), atom("v")});
  }
};

}  // namespace

TEST_CASE("gamma matrix identities") {
  MatrixExpr g0 = gamma_matrix(0), g1 = gamma_matrix(1), g2 = gamma_matrix(2);
  CHECK(g0 * g1 == gamma5());
  CHECK(Expr::imaginary() * g2 == gamma5());
  // Clifford relation {gamma^mu, gamma^nu} = 2 eta^{mu nu}
  for (int mu = 0; mu < 3; ++mu)
    for (int nu = 0; nu < 3; ++nu) {
      MatrixExpr anti = gamma_matrix(mu) * gamma_matrix(nu) + gamma_matrix(nu) * gamma_matrix(mu);
      MatrixExpr want = Expr::rational(2 * target_eta(mu, nu)) * identity_matrix();
      CHECK(anti == want);
    }
}

TEST_CASE("pauli completeness holds for sigma(1,2,3)") {
  PauliReport rep = pauli_identity_check(PauliVariant::Pauli123);
  CHECK(rep.all_hold);
  CHECK(rep.tuples.size() == 16);
  for (const auto& t : rep.tuples) {
    CHECK(t.holds);
    if (t.i == 1 && t.j == 1 && t.k == 2 && t.l == 2) {
      CHECK(t.lhs == Coeff(-1));
      CHECK(t.rhs == Coeff(-1));
    }
  }
}

TEST_CASE("pauli identity fails for the literal (0,1,2) triple") {
  PauliReport rep = pauli_identity_check(PauliVariant::Literal012);
  CHECK_FALSE(rep.all_hold);
  bool found = false;
  for (const auto& t : rep.tuples) {
    if (t.i == 1 && t.j == 1 && t.k == 2 && t.l == 2) {
      found = true;
      CHECK_FALSE(t.holds);
      CHECK(t.lhs == Coeff(1));
      CHECK(t.rhs == Coeff(-1));
    }
  }
  CHECK(found);
}

TEST_CASE("gauge projection kills the (1+gamma5) component") {
  GammaFixture f;
  Spinor psi{f.atom("u"), f.atom("v")};
  Spinor proj = gauge_project(psi);
  CHECK(proj.up == mul(Expr::alpha_unit(), f.atom("u")));
  CHECK(proj.dn.is_zero());
  // (1 + gamma5) annihilates the result for any input
  MatrixExpr one_plus = identity_matrix() + gamma5();
  Spinor out = one_plus * proj;
  CHECK(out.up.is_zero());
  CHECK(out.dn.is_zero());
}

TEST_CASE("bosonic induced vectors of the Cartesian map") {
  GammaFixture f;
  Spinor zero{Expr::zero(), Expr::zero()};
  auto A0 = induced_vector(f.cartesian(), zero, 0);
  auto A1 = induced_vector(f.cartesian(), zero, 1);
  CHECK(A0[0] == Expr::one());
  CHECK(A0[1].is_zero());
  CHECK(A0[2] == scale(f.th(1, 0), Coeff(1), -4));
  CHECK(A1[1] == Expr::one());
}

TEST_CASE("gauge-fixed bilinear of A00 carries the normalization") {
  GammaFixture f;
  auto A0 = induced_vector(f.cartesian(), f.gauge_fixed(), 0);
  // frozen: A^0_0 = 1 - (1/(2 c^2)) u u_t
  Expr want = add(Expr::one(), scale(f.uu(1, 0), Coeff(Rational(-1, 2)), -4));
  CHECK(A0[0] == want);
}

TEST_CASE("induced metric reproduces the printed gauge-fixed components") {
  GammaFixture f;
  MatrixExpr g = induced_metric(f.cartesian(), f.gauge_fixed());

  Expr g00 = add(sub(Expr::one(), scale(sq(f.th(1, 0)), Coeff(1), -8)),
                 scale(f.uu(1, 0), Coeff(-1), -4));
  Expr g01 = add(add(scale(mul(f.th(0, 1), f.th(1, 0)), Coeff(-1), -6),
                     scale(f.uu(0, 1), Coeff(Rational(-1, 2)), -2)),
                 scale(f.uu(1, 0), Coeff(Rational(-1, 2)), -4));
  Expr g11 = add(add(Expr::integer(-1), scale(sq(f.th(0, 1)), Coeff(-1), -4)),
                 scale(f.uu(0, 1), Coeff(-1), -2));

  CHECK(g.at(0, 0) == g00);
  CHECK(g.at(0, 1) == g01);
  CHECK(g.at(1, 0) == g01);
  CHECK(g.at(1, 1) == g11);

  // i-freeness: only real coefficients and integer powers of c
  for (int k = 0; k < 4; ++k) {
    CHECK(coeff_is_i_free(g.e[k]));
    CHECK(c_powers_integer(g.e[k]));
  }
}

TEST_CASE("determinant combination reproduces the nine-term expansion") {
  GammaFixture f;
  MatrixExpr g = induced_metric(f.cartesian(), f.gauge_fixed());
  Expr det = det_g(g);

  Expr want = Expr::one();
  want = add(want, scale(sq(f.th(1, 0)), Coeff(-1), -8));
  want = add(want, scale(sq(f.th(0, 1)), Coeff(1), -4));
  want = add(want, scale(f.uu(0, 1), Coeff(1), -2));
  want = add(want, scale(f.uu(1, 0), Coeff(-1), -4));
  want = add(want, scale(mul(sq(f.th(1, 0)), f.uu(0, 1)), Coeff(-1), -10));
  want = add(want, scale(mul(sq(f.th(0, 1)), f.uu(1, 0)), Coeff(-1), -8));
  want = add(want, scale(mul(mul(f.th(0, 1), f.th(1, 0)), f.uu(0, 1)), Coeff(1), -8));
  want = add(want, scale(mul(mul(f.th(0, 1), f.th(1, 0)), f.uu(1, 0)), Coeff(1), -10));
  CHECK(det == want);

  // u -> 0 reduction
  Expr bosonic = substitute(det, {{f.ctx.require("u").id, Expr::zero()}}, f.none);
  Expr bw = add(sub(Expr::one(), scale(sq(f.th(1, 0)), Coeff(1), -8)),
                scale(sq(f.th(0, 1)), Coeff(1), -4));
  CHECK(bosonic == bw);

  CHECK(coeff_is_i_free(det));
  CHECK(c_powers_integer(det));
}

TEST_CASE("determinant of the flat metric") {
  MatrixExpr eta;
  eta.at(0, 0) = Expr::one();
  eta.at(1, 1) = Expr::integer(-1);
  eta.at(0, 1) = Expr::zero();
  eta.at(1, 0) = Expr::zero();
  CHECK(det_g(eta) == Expr::one());
}

TEST_CASE("determinant route agrees with the oracle on a random odd matrix") {
  GammaFixture f;
  // symmetric 2x2 with odd-bilinear dressing
  MatrixExpr g;
  g.at(0, 0) = add(Expr::one(), f.uu(1, 0));
  g.at(0, 1) = add(f.th(0, 1), scale(f.uu(0, 1), Coeff(Rational(1, 3))));
  g.at(1, 0) = g.at(0, 1);
  g.at(1, 1) = sub(f.th(1, 0), f.uu(0, 1));
  Expr det = det_g(g);

  // two routes: symbolic determinant evaluated numerically, against the
  // numeric combination of the individually evaluated entries
  std::set<std::pair<std::string, Atom>> atoms;
  for (int k = 0; k < 4; ++k) collect_atoms(g.e[k], atoms);
  for (uint64_t t = 0; t < 50; ++t) {
    std::mt19937_64 rng(1234 + t);
    Assignment a = random_assignment(atoms, f.none, rng);
    OracleCtx octx{a.c_value};
    GrassElem s = oracle_eval(det, a);
    GrassElem e01 = oracle_eval(g.at(0, 1), a);
    GrassElem e00 = oracle_eval(g.at(0, 0), a);
    GrassElem e11 = oracle_eval(g.at(1, 1), a);
    GrassElem n = elem_mul(e01, e01, octx) - elem_mul(e00, e11, octx);
    REQUIRE((s - n).is_zero());
  }
}

TEST_CASE("supplementary term in the Cartesian gauge-fixed configuration") {
  GammaFixture f;
  Expr wz = wz_term(f.cartesian(), f.gauge_fixed());
  Expr want = add(scale(f.uu(0, 1), Coeff(Rational(-1, 2)), -2),
                  scale(f.uu(1, 0), Coeff(Rational(1, 2)), -4));
  CHECK(wz == want);
  CHECK(coeff_is_i_free(wz));

  Spinor zero{Expr::zero(), Expr::zero()};
  CHECK(wz_term(f.cartesian(), zero).is_zero());
}

TEST_CASE("epsilon contraction summands are antisymmetric under index swap") {
  GammaFixture f;
  Spinor psi{f.atom("u"), f.atom("v")};
  Expr t01 = wz_summand(f.cartesian(), psi, 0, 1);
  Expr t10 = wz_summand(f.cartesian(), psi, 1, 0);
  Expr contraction = sub(t01, t10);
  // swapping the indices inside the contraction negates it
  CHECK(sub(t10, t01) == neg(contraction));
  CHECK(wz_term(f.cartesian(), psi) == neg(mul(Expr::imaginary(), contraction)));
}

TEST_CASE("general-spinor metric matches the printed expansion with factor 3") {
  GammaFixture f;
  f.ctx.declare_field("p1", Parity::Odd, kChartTx);
  f.ctx.declare_field("p2", Parity::Odd, kChartTx);
  Spinor psi{f.atom("p1"), f.atom("p2")};
  Parameterization P = f.cartesian();
  MatrixExpr g = induced_metric(P, psi);

  auto wd = [&](const Expr& e, int i) { return worldsheet_derive(e, i); };
  auto dpsi = [&](int i) { return worldsheet_derive(psi, i); };
  Expr I = Expr::imaginary();
  Expr theta = f.atom("theta");

  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Expr eta_ij = (i == j) ? (i == 0 ? Expr::one() : Expr::integer(-1)) : Expr::zero();
      Expr expect = eta_ij;
      expect = sub(expect, scale(mul(wd(theta, i), wd(theta, j)), Coeff(1), -4));
      // -i psibar gamma_i d_j psi - i psibar gamma_j d_i psi (worldsheet lowering)
      auto gamma_low = [&](int k) {
        return k == 0 ? gamma_matrix(0) : (Expr::integer(-1) * gamma_matrix(1));
      };
      expect = sub(expect, mul(I, (bar(psi) * gamma_low(i)) * dpsi(j)));
      expect = sub(expect, mul(I, (bar(psi) * gamma_low(j)) * dpsi(i)));
      // + (i/c) d_i theta psibar gamma^2 d_j psi + (i <-> j)
      expect = add(expect, scale(mul(mul(wd(theta, i), I), (bar(psi) * gamma_matrix(2)) * dpsi(j)),
                                 Coeff(1), -2));
      expect = add(expect, scale(mul(mul(wd(theta, j), I), (bar(psi) * gamma_matrix(2)) * dpsi(i)),
                                 Coeff(1), -2));
      // + 3 psibar d_i psi psibar d_j psi
      Expr bb = mul(bar(psi) * dpsi(i), bar(psi) * dpsi(j));
      expect = add(expect, scale(bb, Coeff(3)));
      CHECK(g.at(i, j) == expect);
    }
}
