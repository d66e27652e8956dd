#pragma once

#include <utility>

#include "gft/calculus.hpp"

namespace gft {

// Canonical pair on the light-cone chart: theta with momentum Pi, evolution
// along the (+) coordinate.
struct CanonicalPair {
  Atom coordinate_field;  // zero-derivative atom of theta
  Atom momentum_field;    // zero-derivative atom of Pi (even)
  int evolution_coord = 0;
  uint8_t chart = kChartLc;

  Atom velocity_atom() const {
    Atom a = coordinate_field;
    a.chart = chart;
    a.d[evolution_coord] = 1;
    return a;
  }
};

// Pi = dL/d theta_+, nilpotent-resolved by construction.
inline Expr canonical_momentum(const Expr& L, const CanonicalPair& pair,
                               const Assumptions& asm_set) {
  return partial_atom(L, pair.velocity_atom(), asm_set);
}

struct InversionReport {
  Expr residual;
  bool verified = false;
};

// Substitutes the candidate theta_+ into the momentum expression; the
// inversion holds iff Pi - result vanishes after nilpotent resolution and
// the declared-positive root collapse.
inline InversionReport verify_inversion(const Expr& pi_expr, const Expr& candidate,
                                        const CanonicalPair& pair,
                                        const Assumptions& asm_set) {
  Expr substituted = subst_atom(pi_expr, pair.velocity_atom(), candidate, asm_set);
  Expr residual = sub(Expr::from_atom(pair.momentum_field), substituted);
  return InversionReport{residual, residual.is_zero()};
}

// Secondary inversion path: given the body-level (odd-free) branch of the
// solution, the nilpotent correction follows from Newton steps; each step is
// exact because the correction squares to zero, and the iteration terminates
// by nilpotency. The result satisfies Pi = pi_expr[theta_+ -> s] identically.
inline Expr solve_inversion(const Expr& pi_expr, const CanonicalPair& pair,
                            const Expr& body_solution, const Assumptions& asm_set,
                            int max_iter = 8) {
  Atom vel = pair.velocity_atom();
  Expr pi = Expr::from_atom(pair.momentum_field);
  Expr fprime = partial_atom(pi_expr, vel, asm_set);
  Expr s = body_solution;
  for (int k = 0; k < max_iter; ++k) {
    Expr residual = sub(pi, subst_atom(pi_expr, vel, s, asm_set));
    if (residual.is_zero()) return s;
    Expr slope = subst_atom(fprime, vel, s, asm_set);
    s = add(s, mul(residual, pow_expr(slope, Rational(-1), asm_set)));
  }
  raise(ErrorKind::NonNilpotent, "inversion solver did not converge");
}

// H = Pi theta_+ - L with theta_+ eliminated through the verified solution.
inline Expr legendre(const Expr& L, const CanonicalPair& pair, const Expr& theta_plus_solution,
                     const Assumptions& asm_set) {
  Expr pi = Expr::from_atom(pair.momentum_field);
  Expr h = sub(mul(pi, theta_plus_solution),
               subst_atom(L, pair.velocity_atom(), theta_plus_solution, asm_set));
  return h;
}

// Field equations of the canonical Lagrangian: (EL in Pi, EL in theta).
inline std::pair<Expr, Expr> derive_eom(const Expr& L_canonical, const CanonicalPair& pair,
                                        const Assumptions& asm_set) {
  Expr eom_pi = euler_lagrange(L_canonical, pair.momentum_field.name, pair.chart, asm_set);
  Expr eom_theta = euler_lagrange(L_canonical, pair.coordinate_field.name, pair.chart, asm_set);
  return {eom_pi, eom_theta};
}

}  // namespace gft
