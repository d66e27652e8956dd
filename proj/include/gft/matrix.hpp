#pragma once

#include <array>
#include <string>
#include <vector>

#include "gft/expr.hpp"

namespace gft {

// 2x2 matrix over Expr.
struct MatrixExpr {
  std::array<Expr, 4> e{};  // row-major

  Expr& at(int i, int j) { return e[i * 2 + j]; }
  const Expr& at(int i, int j) const { return e[i * 2 + j]; }

  static MatrixExpr zero() { return MatrixExpr{}; }

  static MatrixExpr from_coeffs(Coeff a, Coeff b, Coeff c, Coeff d) {
    MatrixExpr m;
    m.e = {Expr::constant(a), Expr::constant(b), Expr::constant(c), Expr::constant(d)};
    return m;
  }

  friend MatrixExpr operator+(const MatrixExpr& x, const MatrixExpr& y) {
    MatrixExpr r;
    for (int k = 0; k < 4; ++k) r.e[k] = add(x.e[k], y.e[k]);
    return r;
  }
  friend MatrixExpr operator-(const MatrixExpr& x, const MatrixExpr& y) {
    MatrixExpr r;
    for (int k = 0; k < 4; ++k) r.e[k] = sub(x.e[k], y.e[k]);
    return r;
  }
  friend MatrixExpr operator*(const MatrixExpr& x, const MatrixExpr& y) {
    MatrixExpr r;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        r.at(i, j) = add(mul(x.at(i, 0), y.at(0, j)), mul(x.at(i, 1), y.at(1, j)));
    return r;
  }
  friend MatrixExpr operator*(const Expr& s, const MatrixExpr& y) {
    MatrixExpr r;
    for (int k = 0; k < 4; ++k) r.e[k] = mul(s, y.e[k]);
    return r;
  }
  friend bool operator==(const MatrixExpr& x, const MatrixExpr& y) {
    for (int k = 0; k < 4; ++k)
      if (!(x.e[k] == y.e[k])) return false;
    return true;
  }
};

// Two-component odd column spinor.
struct Spinor {
  Expr up, dn;
};

struct RowSpinor {
  Expr left, right;
};

inline Spinor operator*(const MatrixExpr& m, const Spinor& s) {
  return Spinor{add(mul(m.at(0, 0), s.up), mul(m.at(0, 1), s.dn)),
                add(mul(m.at(1, 0), s.up), mul(m.at(1, 1), s.dn))};
}

inline RowSpinor operator*(const RowSpinor& r, const MatrixExpr& m) {
  return RowSpinor{add(mul(r.left, m.at(0, 0)), mul(r.right, m.at(1, 0))),
                   add(mul(r.left, m.at(0, 1)), mul(r.right, m.at(1, 1)))};
}

inline Expr operator*(const RowSpinor& r, const Spinor& s) {
  return add(mul(r.left, s.up), mul(r.right, s.dn));
}

inline Spinor operator*(const Expr& s, const Spinor& p) {
  return Spinor{mul(s, p.up), mul(s, p.dn)};
}

inline Spinor operator+(const Spinor& a, const Spinor& b) {
  return Spinor{add(a.up, b.up), add(a.dn, b.dn)};
}

// psibar = psi^dagger gamma^0; dagger is transpose plus conjugation of the
// coefficient field (field atoms are real). With gamma^0 = sigma^1 this is
// (conj psi_2, conj psi_1).
inline RowSpinor bar(const Spinor& s) {
  return RowSpinor{coeff_conj(s.dn), coeff_conj(s.up)};
}

// gamma^0 = sigma^1, gamma^1 = i sigma^2, gamma^2 = i sigma^3; gamma^5 =
// gamma^0 gamma^1 = diag(-1, 1). Target metric eta = diag(1, -1, -1).
inline MatrixExpr gamma_matrix(int mu) {
  switch (mu) {
    case 0: return MatrixExpr::from_coeffs(Coeff(0), Coeff(1), Coeff(1), Coeff(0));
    case 1: return MatrixExpr::from_coeffs(Coeff(0), Coeff(1), Coeff(-1), Coeff(0));
    case 2:
      return MatrixExpr::from_coeffs(Coeff::imaginary(), Coeff(0), Coeff(0),
                                     Coeff::imaginary(Rational(-1)));
    default: raise(ErrorKind::Internal, "gamma index out of range");
  }
}

inline MatrixExpr gamma5() {
  return MatrixExpr::from_coeffs(Coeff(-1), Coeff(0), Coeff(0), Coeff(1));
}

inline MatrixExpr identity_matrix() {
  return MatrixExpr::from_coeffs(Coeff(1), Coeff(0), Coeff(0), Coeff(1));
}

inline Rational target_eta(int mu, int nu) {
  if (mu != nu) return Rational(0);
  return mu == 0 ? Rational(1) : Rational(-1);
}

// ---------------------------------------------------------------------------
// Pauli completeness identity
// ---------------------------------------------------------------------------

enum class PauliVariant { Pauli123, Literal012 };

struct PauliTuple {
  int i, j, k, l;
  Coeff lhs, rhs;
  bool holds;
};

struct PauliReport {
  PauliVariant variant;
  std::vector<PauliTuple> tuples;
  bool all_hold = true;
};

inline std::array<std::array<Coeff, 2>, 2> sigma_matrix(int k) {
  using C = Coeff;
  switch (k) {
    case 0: return {{{C(1), C(0)}, {C(0), C(1)}}};
    case 1: return {{{C(0), C(1)}, {C(1), C(0)}}};
    case 2: return {{{C(0), C::imaginary(Rational(-1))}, {C::imaginary(), C(0)}}};
    case 3: return {{{C(1), C(0)}, {C(0), C(-1)}}};
    default: raise(ErrorKind::Internal, "sigma index out of range");
  }
}

// Enumerates all 16 index tuples of sum_mu (sigma^mu)_ij (sigma^mu)_kl
// against 2 d_il d_jk - d_ij d_kl for the chosen matrix triple.
inline PauliReport pauli_identity_check(PauliVariant variant) {
  PauliReport rep;
  rep.variant = variant;
  std::array<int, 3> ms = variant == PauliVariant::Pauli123 ? std::array<int, 3>{1, 2, 3}
                                                            : std::array<int, 3>{0, 1, 2};
  for (int i = 1; i <= 2; ++i)
    for (int j = 1; j <= 2; ++j)
      for (int k = 1; k <= 2; ++k)
        for (int l = 1; l <= 2; ++l) {
          Coeff lhs(0);
          for (int m : ms) {
            auto s = sigma_matrix(m);
            lhs += s[i - 1][j - 1] * s[k - 1][l - 1];
          }
          Coeff rhs = Coeff(Rational(2 * (i == l) * (j == k) - (i == j) * (k == l)));
          bool holds = lhs == rhs;
          rep.tuples.push_back(PauliTuple{i, j, k, l, lhs, rhs, holds});
          if (!holds) rep.all_hold = false;
        }
  return rep;
}

// ---------------------------------------------------------------------------
// Parameterization, induced metric, supplementary term
// ---------------------------------------------------------------------------

// Target map X^mu as expressions on the tx chart. The worldsheet coordinates
// are phi^0 = ct, phi^1 = x, so d_0 = (1/c) d_t and d_1 = d_x.
struct Parameterization {
  std::array<Expr, 3> X;
};

inline Expr worldsheet_derive(const Expr& e, int i) {
  if (i == 0) return scale(coord_derive(e, kChartTx, 0), Coeff(1), -2);
  if (i == 1) return coord_derive(e, kChartTx, 1);
  raise(ErrorKind::Internal, "worldsheet index out of range");
}

inline Spinor worldsheet_derive(const Spinor& s, int i) {
  return Spinor{worldsheet_derive(s.up, i), worldsheet_derive(s.dn, i)};
}

// A^mu_i = d_i X^mu - i psibar gamma^mu d_i psi.
inline std::array<Expr, 3> induced_vector(const Parameterization& P, const Spinor& psi,
                                          int i) {
  std::array<Expr, 3> A;
  RowSpinor pb = bar(psi);
  Spinor dpsi = worldsheet_derive(psi, i);
  for (int mu = 0; mu < 3; ++mu) {
    Expr bilinear = (pb * gamma_matrix(mu)) * dpsi;
    A[mu] = sub(worldsheet_derive(P.X[mu], i), mul(Expr::imaginary(), bilinear));
  }
  return A;
}

// g_ij = eta_munu A^mu_i A^nu_j.
inline MatrixExpr induced_metric(const Parameterization& P, const Spinor& psi) {
  std::array<std::array<Expr, 3>, 2> A = {induced_vector(P, psi, 0),
                                          induced_vector(P, psi, 1)};
  MatrixExpr g;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Expr s = Expr::zero();
      for (int mu = 0; mu < 3; ++mu) {
        Expr term = mul(A[i][mu], A[j][mu]);
        if (mu != 0) term = neg(term);
        s = add(s, term);
      }
      g.at(i, j) = s;
    }
  return g;
}

// g = g_01^2 - g_00 g_11 (minus the determinant for signature (+,-)).
inline Expr det_g(const MatrixExpr& g) {
  return sub(mul(g.at(0, 1), g.at(1, 0)), mul(g.at(0, 0), g.at(1, 1)));
}

// One epsilon-contraction summand of the supplementary term:
// T_ij = d_i X^mu psibar gamma_mu d_j psi (target index lowered).
inline Expr wz_summand(const Parameterization& P, const Spinor& psi, int i, int j) {
  RowSpinor pb = bar(psi);
  Spinor dpsi = worldsheet_derive(psi, j);
  Expr s = Expr::zero();
  for (int mu = 0; mu < 3; ++mu) {
    Expr bil = (pb * gamma_matrix(mu)) * dpsi;
    Expr term = mul(worldsheet_derive(P.X[mu], i), bil);
    if (mu != 0) term = neg(term);  // lower with eta = diag(1,-1,-1)
    s = add(s, term);
  }
  return s;
}

// Supplementary term of the action: -i eps^{ij} d_i X^mu psibar gamma_mu
// d_j psi with eps^{01} = +1.
inline Expr wz_term(const Parameterization& P, const Spinor& psi) {
  Expr contraction = sub(wz_summand(P, psi, 0, 1), wz_summand(P, psi, 1, 0));
  return neg(mul(Expr::imaginary(), contraction));
}

// Removes the component annihilated by (1 + gamma^5) and folds the
// normalization 1/sqrt(2ic) into the surviving one: (u, v) -> (alpha u, 0).
inline Spinor gauge_project(const Spinor& psi) {
  return Spinor{mul(Expr::alpha_unit(), psi.up), Expr::zero()};
}

}  // namespace gft
