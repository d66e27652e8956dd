#pragma once

#include <map>
#include <string>
#include <vector>

#include "gft/expr.hpp"

namespace gft {

// Left partial derivative with respect to a single atom. Even atoms follow
// the ordinary chain rule through power factors; odd atoms are anticommuted
// to the leftmost position and removed, so d(u u_x)/du_x = -u.
inline Expr partial_atom(const Expr& e, const Atom& target, const Assumptions& asm_set) {
  Expr acc = Expr::zero();
  for (const auto& m : e.terms()) {
    if (target.parity == Parity::Even) {
      for (size_t i = 0; i < m.factors.size(); ++i) {
        const Factor& f = m.factors[i];
        Expr dsite;
        if (f.is_atom) {
          if (!(f.atom == target)) continue;
          Monomial rest;
          rest.coeff = m.coeff * Coeff(Rational(f.exp));
          rest.c_half = m.c_half;
          rest.alpha = m.alpha;
          for (size_t j = 0; j < m.factors.size(); ++j) {
            if (j == i) {
              if (f.exp != 1) {
                Factor nf = f;
                nf.exp = f.exp - 1;
                rest.factors.push_back(std::move(nf));
              }
            } else {
              rest.factors.push_back(m.factors[j]);
            }
          }
          rest.odds = m.odds;
          std::sort(rest.factors.begin(), rest.factors.end(),
                    [](const Factor& a, const Factor& b) { return factor_compare(a, b) < 0; });
          dsite = Expr::from_monomials({std::move(rest)});
        } else {
          Expr db = partial_atom(*f.base, target, asm_set);
          if (db.is_zero()) continue;
          Monomial rest;
          rest.coeff = m.coeff * Coeff(Rational(f.exp));
          rest.c_half = m.c_half;
          rest.alpha = m.alpha;
          for (size_t j = 0; j < m.factors.size(); ++j)
            if (j != i) rest.factors.push_back(m.factors[j]);
          rest.odds = m.odds;
          std::sort(rest.factors.begin(), rest.factors.end(),
                    [](const Factor& a, const Factor& b) { return factor_compare(a, b) < 0; });
          dsite = mul(Expr::from_monomials({std::move(rest)}),
                      mul(pow_expr(*f.base, f.exp - 1, asm_set), db));
        }
        acc = add(acc, dsite);
      }
    } else {
      for (size_t i = 0; i < m.odds.size(); ++i) {
        if (!(m.odds[i] == target)) continue;
        Monomial rest;
        rest.coeff = (i % 2 == 0) ? m.coeff : -m.coeff;
        rest.c_half = m.c_half;
        rest.alpha = m.alpha;
        rest.factors = m.factors;
        rest.odds = m.odds;
        rest.odds.erase(rest.odds.begin() + i);
        acc = add(acc, Expr::from_monomials({std::move(rest)}));
        break;  // odd atoms occur at most once per monomial
      }
    }
  }
  return acc;
}

// Euler-Lagrange operator: sum over derivative multi-indices D of
// (-1)^|D| d_D (dL/d f_D), supported through second order.
inline Expr euler_lagrange(const Expr& L, uint32_t field, uint8_t chart,
                           const Assumptions& asm_set) {
  std::set<std::pair<std::string, Atom>> atoms;
  collect_atoms(L, atoms);
  Expr acc = Expr::zero();
  for (const auto& [name, a] : atoms) {
    if (a.name != field) continue;
    int order = a.deriv_total();
    if (order > 2)
      raise(ErrorKind::HigherOrder,
            "Lagrangian contains derivative of order > 2 of '" + sym_name(field) + "'");
    Expr piece = partial_atom(L, a, asm_set);
    for (int coord = 0; coord < 2; ++coord)
      for (int k = 0; k < a.d[coord]; ++k) piece = coord_derive(piece, chart, coord);
    if (order % 2 == 1) piece = neg(piece);
    acc = add(acc, piece);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Chart changes
// ---------------------------------------------------------------------------

namespace detail {

// Transports one field atom into the target chart by applying the operator
// relations d_+/- = (1/sqrt 2)((1/c) d_t +/- d_x) (or their inverse).
inline Expr transport_atom(const Atom& a, uint8_t target, const Assumptions& asm_set) {
  (void)asm_set;
  if (a.kind == SymKind::Param) return Expr::from_atom(a);
  if (a.kind == SymKind::Coord)
    raise(ErrorKind::ChartMix, "explicit coordinate '" + sym_name(a.name) +
                                   "' has no image in the target chart");
  if (a.chart == target || a.chart == kChartNone) return Expr::from_atom(a);

  Atom base = a;
  base.chart = kChartNone;
  base.d = {0, 0};
  Expr e = Expr::from_atom(base);

  const Coeff inv_sqrt2 = Coeff::sqrt2_power(-1);
  if (a.chart == kChartTx && target == kChartLc) {
    // d_t = (c/sqrt2)(d_+ + d_-),  d_x = (1/sqrt2)(d_+ - d_-)
    for (int k = 0; k < a.d[0]; ++k)
      e = scale(add(coord_derive(e, kChartLc, 0), coord_derive(e, kChartLc, 1)),
                inv_sqrt2, 2);
    for (int k = 0; k < a.d[1]; ++k)
      e = scale(sub(coord_derive(e, kChartLc, 0), coord_derive(e, kChartLc, 1)),
                inv_sqrt2);
  } else if (a.chart == kChartLc && target == kChartTx) {
    // d_+ = (1/sqrt2)((1/c) d_t + d_x),  d_- = (1/sqrt2)((1/c) d_t - d_x)
    for (int k = 0; k < a.d[0]; ++k)
      e = scale(add(scale(coord_derive(e, kChartTx, 0), Coeff(1), -2),
                    coord_derive(e, kChartTx, 1)),
                inv_sqrt2);
    for (int k = 0; k < a.d[1]; ++k)
      e = scale(sub(scale(coord_derive(e, kChartTx, 0), Coeff(1), -2),
                    coord_derive(e, kChartTx, 1)),
                inv_sqrt2);
  } else {
    raise(ErrorKind::ChartMix, "unsupported chart pair");
  }
  return e;
}

}  // namespace detail

// Rewrites every atom by the invertible light-cone relations; round trips
// are exact at any derivative order.
inline Expr change_chart(const Expr& e, uint8_t target, const Assumptions& asm_set) {
  Expr acc = Expr::zero();
  for (const auto& m : e.terms()) {
    Expr piece = Expr::constant(m.coeff, m.c_half, m.alpha);
    for (const auto& f : m.factors) {
      if (f.is_atom)
        piece = mul(piece, pow_expr(detail::transport_atom(f.atom, target, asm_set), f.exp,
                                    asm_set));
      else
        piece = mul(piece, pow_expr(change_chart(*f.base, target, asm_set), f.exp, asm_set));
    }
    for (const auto& a : m.odds)
      piece = mul(piece, detail::transport_atom(a, target, asm_set));
    acc = add(acc, piece);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Series in c and the nonrelativistic limit
// ---------------------------------------------------------------------------

// Laurent data in powers of c^(1/2): twice-exponent -> c-free coefficient.
struct SeriesInC {
  std::map<int, Expr> terms;
  int truncation_twice = 0;

  Expr reconstruct() const {
    Expr acc = Expr::zero();
    for (const auto& [h, coef] : terms) acc = add(acc, scale(coef, Coeff(1), h));
    return acc;
  }
};

namespace detail {

inline bool has_c_dependence(const Expr& e) {
  for (const auto& m : e.terms()) {
    if (m.c_half != 0) return true;
    for (const auto& f : m.factors)
      if (!f.is_atom && has_c_dependence(*f.base)) return true;
  }
  return false;
}

using CSeriesMap = std::map<int, Expr>;

inline CSeriesMap series_mul(const CSeriesMap& a, const CSeriesMap& b, int cutoff) {
  CSeriesMap out;
  for (const auto& [ha, ca] : a)
    for (const auto& [hb, cb] : b) {
      int h = ha + hb;
      if (h < cutoff) continue;
      Expr prod = mul(ca, cb);
      if (prod.is_zero()) continue;
      auto it = out.find(h);
      if (it == out.end())
        out.emplace(h, std::move(prod));
      else {
        it->second = add(it->second, prod);
        if (it->second.is_zero()) out.erase(it);
      }
    }
  return out;
}

inline void series_add_term(CSeriesMap& s, int h, const Expr& e) {
  if (e.is_zero()) return;
  auto it = s.find(h);
  if (it == s.end())
    s.emplace(h, e);
  else {
    it->second = add(it->second, e);
    if (it->second.is_zero()) s.erase(it);
  }
}

inline int base_hmax(const Expr& B) {
  int hmax = INT32_MIN;
  for (const auto& m : B.terms()) {
    for (const auto& f : m.factors)
      if (!f.is_atom && has_c_dependence(*f.base))
        raise(ErrorKind::IndeterminateLeadingTerm,
              "power base contains a nested c-dependent root");
    hmax = std::max(hmax, m.c_half);
  }
  if (hmax == INT32_MIN)
    raise(ErrorKind::IndeterminateLeadingTerm, "empty power base");
  return hmax;
}

inline int base_lead_twice(const Expr& B, const Rational& s) {
  Rational lead = Rational(base_hmax(B)) * s;
  if (!is_integer(lead))
    raise(ErrorKind::IndeterminateLeadingTerm,
          "leading power of c is not a half-integer under this exponent");
  return static_cast<int>(num(lead));
}

// Series of Pow(B, s) around c -> infinity; terms with twice-exponent below
// `cutoff` are dropped, everything at or above it is exact.
inline CSeriesMap pow_base_series(const Expr& B, const Rational& s, int cutoff,
                                  const Assumptions& asm_set) {
  int hmax = base_hmax(B);

  std::vector<Monomial> lead, lower;
  for (const auto& m : B.terms()) {
    Monomial n = m;
    n.c_half -= hmax;
    (m.c_half == hmax ? lead : lower).push_back(std::move(n));
  }
  Expr B0 = Expr::from_monomials(std::move(lead));
  int h_lead = base_lead_twice(B, s);

  // B = c^hmax (B0 + T) with every T term at twice-exponent <= -1, so
  // Pow(B, s) = c^(hmax s) * sum_j binom(s, j) B0^(s-j) T^j.
  CSeriesMap T;
  for (const auto& m : lower) {
    Monomial n = m;
    int h = n.c_half;
    n.c_half = 0;
    series_add_term(T, h, Expr::from_monomials({n}));
  }

  CSeriesMap acc;
  CSeriesMap Tpow;
  Tpow.emplace(0, Expr::one());
  for (long long j = 0;; ++j) {
    if (!Tpow.empty()) {
      Expr factor = pow_expr(B0, s - Rational(j), asm_set);
      factor = scale(factor, Coeff(binom_rational(s, j)));
      for (const auto& [h, coef] : Tpow) {
        int total = h_lead + h;
        if (total >= cutoff) series_add_term(acc, total, mul(factor, coef));
      }
    }
    if (Tpow.empty()) break;
    // next power; dropping anything already below cutoff relative to h_lead
    Tpow = series_mul(Tpow, T, cutoff - h_lead);
    if (static_cast<long long>(j) > 512)
      raise(ErrorKind::IndeterminateLeadingTerm, "series failed to terminate");
  }
  return acc;
}

}  // namespace detail

// Expands e in powers of c^(1/2) down to (and including) the twice-exponent
// `order_twice`; all higher terms are exact.
inline SeriesInC c_series(const Expr& e, int order_twice, const Assumptions& asm_set) {
  SeriesInC out;
  out.truncation_twice = order_twice;
  for (const auto& m : e.terms()) {
    Monomial stripped = m;
    int h0 = m.c_half;
    stripped.c_half = 0;
    std::vector<std::pair<ExprPtr, Rational>> c_bases;
    std::vector<Factor> kept;
    for (const auto& f : stripped.factors) {
      if (!f.is_atom && detail::has_c_dependence(*f.base))
        c_bases.emplace_back(f.base, f.exp);
      else
        kept.push_back(f);
    }
    stripped.factors = std::move(kept);

    // Per-factor cutoffs: a factor only needs terms whose exponent, combined
    // with the leading exponents of everything else, can still reach order.
    std::vector<int> leads(c_bases.size());
    int total_lead = h0;
    for (size_t i = 0; i < c_bases.size(); ++i) {
      leads[i] = detail::base_lead_twice(*c_bases[i].first, c_bases[i].second);
      total_lead += leads[i];
    }

    detail::CSeriesMap acc;
    acc.emplace(h0, Expr::from_monomials({stripped}));
    int remaining = total_lead - h0;
    for (size_t i = 0; i < c_bases.size(); ++i) {
      remaining -= leads[i];
      int cutoff_i = order_twice - (total_lead - leads[i]);
      detail::CSeriesMap bs =
          detail::pow_base_series(*c_bases[i].first, c_bases[i].second, cutoff_i, asm_set);
      acc = detail::series_mul(acc, bs, order_twice - remaining);
    }
    for (const auto& [h, coef] : acc) detail::series_add_term(out.terms, h, coef);
  }
  return out;
}

// Exact c -> infinity limit: every positive half-power must cancel
// identically; the result is the constant coefficient.
inline Expr c_limit(const Expr& e, const Assumptions& asm_set, int order_twice = 0) {
  SeriesInC s = c_series(e, std::min(order_twice, 0), asm_set);
  std::string divergent;
  for (const auto& [h, coef] : s.terms) {
    if (h > 0 && !coef.is_zero()) {
      if (!divergent.empty()) divergent += "; ";
      divergent += "c^(" + std::to_string(h) + "/2) * (" + expr_str(coef) + ")";
    }
  }
  if (!divergent.empty())
    raise(ErrorKind::DivergentLimit, "surviving positive powers: " + divergent);
  auto it = s.terms.find(0);
  return it == s.terms.end() ? Expr::zero() : it->second;
}

}  // namespace gft
