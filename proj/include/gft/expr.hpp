#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gft/coeff.hpp"
#include "gft/symbols.hpp"

namespace gft {

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// One multiplicative factor of a monomial: an even atom raised to a nonzero
// rational power, or an opaque power of a canonical base expression (the
// "PowAtom"). Bases are Grassmann-even, odd-free, marker-free and
// content-reduced; they only ever come out of pow_expr.
struct Factor {
  bool is_atom = true;
  Atom atom;
  ExprPtr base;
  Rational exp{1};
};

struct Monomial {
  Coeff coeff{1};
  int c_half = 0;     // exponent of c^(1/2)
  int alpha = 0;      // 0 or 1; alpha^2 = 1/(2 i c)
  std::vector<Factor> factors;  // sorted, even atoms / bases, exponents nonzero
  std::vector<Atom> odds;       // strictly increasing odd atoms

  Parity parity() const { return odds.size() % 2 == 0 ? Parity::Even : Parity::Odd; }
};

int expr_compare(const Expr& a, const Expr& b);

inline int rational_compare(const Rational& a, const Rational& b) {
  if (a == b) return 0;
  return a < b ? -1 : 1;
}

inline int factor_compare(const Factor& a, const Factor& b) {
  if (a.is_atom != b.is_atom) return a.is_atom ? -1 : 1;
  if (a.is_atom) {
    int c = atom_compare(a.atom, b.atom);
    if (c != 0) return c;
  } else {
    int c = expr_compare(*a.base, *b.base);
    if (c != 0) return c;
  }
  return rational_compare(a.exp, b.exp);
}

// Key order ignoring exponents is what factor merging uses.
inline int factor_base_compare(const Factor& a, const Factor& b) {
  if (a.is_atom != b.is_atom) return a.is_atom ? -1 : 1;
  if (a.is_atom) return atom_compare(a.atom, b.atom);
  return expr_compare(*a.base, *b.base);
}

inline int monomial_key_compare(const Monomial& a, const Monomial& b) {
  size_t n = std::min(a.factors.size(), b.factors.size());
  for (size_t i = 0; i < n; ++i) {
    int c = factor_compare(a.factors[i], b.factors[i]);
    if (c != 0) return c;
  }
  if (a.factors.size() != b.factors.size())
    return a.factors.size() < b.factors.size() ? -1 : 1;
  size_t m = std::min(a.odds.size(), b.odds.size());
  for (size_t i = 0; i < m; ++i) {
    int c = atom_compare(a.odds[i], b.odds[i]);
    if (c != 0) return c;
  }
  if (a.odds.size() != b.odds.size()) return a.odds.size() < b.odds.size() ? -1 : 1;
  if (a.c_half != b.c_half) return a.c_half < b.c_half ? -1 : 1;
  if (a.alpha != b.alpha) return a.alpha < b.alpha ? -1 : 1;
  return 0;
}

// Canonical sum of monomials. Immutable after construction; all ring
// operations are pure functions returning fresh values.
class Expr {
 public:
  Expr() = default;

  static Expr zero() { return Expr(); }

  static Expr constant(Coeff z, int c_half = 0, int alpha = 0) {
    Expr e;
    if (!z.is_zero()) {
      Monomial m;
      m.coeff = std::move(z);
      m.c_half = c_half;
      m.alpha = alpha;
      fold_units(m);
      e.terms_.push_back(std::move(m));
    }
    return e;
  }

  static Expr one() { return constant(Coeff(1)); }
  static Expr rational(Rational q) { return constant(Coeff(std::move(q))); }
  static Expr integer(long long n) { return constant(Coeff(n)); }
  static Expr imaginary() { return constant(Coeff::imaginary()); }
  static Expr sqrt2() { return constant(Coeff::sqrt2()); }
  static Expr c_power(int half) { return constant(Coeff(1), half); }
  static Expr alpha_unit() { return constant(Coeff(1), 0, 1); }

  static Expr from_atom(const Atom& a) {
    Monomial m;
    if (a.parity == Parity::Odd) {
      m.odds.push_back(a);
    } else {
      Factor f;
      f.is_atom = true;
      f.atom = a;
      f.exp = Rational(1);
      m.factors.push_back(std::move(f));
    }
    Expr e;
    e.terms_.push_back(std::move(m));
    e.recompute_chart();
    return e;
  }

  // Builds a canonical expression from arbitrarily ordered, individually
  // well-formed monomials: sorts, merges equal keys, drops zeros.
  static Expr from_monomials(std::vector<Monomial> ms) {
    std::sort(ms.begin(), ms.end(), [](const Monomial& a, const Monomial& b) {
      return monomial_key_compare(a, b) < 0;
    });
    Expr e;
    for (auto& m : ms) {
      if (m.coeff.is_zero()) continue;
      if (!e.terms_.empty() && monomial_key_compare(e.terms_.back(), m) == 0) {
        e.terms_.back().coeff += m.coeff;
        if (e.terms_.back().coeff.is_zero()) e.terms_.pop_back();
      } else {
        e.terms_.push_back(std::move(m));
      }
    }
    e.recompute_chart();
    return e;
  }

  const std::vector<Monomial>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  bool is_pure_coeff() const {
    return terms_.empty() ||
           (terms_.size() == 1 && terms_[0].factors.empty() && terms_[0].odds.empty());
  }

  bool is_one() const {
    return terms_.size() == 1 && terms_[0].factors.empty() && terms_[0].odds.empty() &&
           terms_[0].coeff.is_one() && terms_[0].c_half == 0 && terms_[0].alpha == 0;
  }

  uint8_t chart() const { return chart_; }

  // Parity if homogeneous, nullopt for a mix. Zero is reported even.
  std::optional<Parity> parity() const {
    if (terms_.empty()) return Parity::Even;
    Parity p = terms_[0].parity();
    for (const auto& m : terms_)
      if (m.parity() != p) return std::nullopt;
    return p;
  }

  int max_odd_degree() const {
    size_t deg = 0;
    for (const auto& m : terms_) deg = std::max(deg, m.odds.size());
    return static_cast<int>(deg);
  }

  // Folds alpha^2 -> 1/(2ic) and kills marker powers >= 2. Returns false if
  // the monomial vanished.
  static bool fold_units(Monomial& m) {
    while (m.alpha >= 2) {
      // alpha^2 = 1/(2 i c) = -i/(2c)
      m.coeff *= Coeff::imaginary(Rational(-1, 2));
      m.c_half -= 2;
      m.alpha -= 2;
    }
    for (const auto& f : m.factors) {
      if (f.is_atom && f.atom.marker) {
        if (!is_integer(f.exp) || f.exp < 0)
          raise(ErrorKind::OddBase, "nilpotent marker raised to non-positive-integer power");
        if (f.exp >= 2) return false;
      }
    }
    return !m.coeff.is_zero();
  }

  friend bool operator==(const Expr& a, const Expr& b) { return expr_compare(a, b) == 0; }
  friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

 private:
  void recompute_chart() {
    chart_ = kChartNone;
    for (const auto& m : terms_) {
      for (const auto& f : m.factors) {
        uint8_t c = f.is_atom ? (f.atom.kind == SymKind::Param ? kChartNone : f.atom.chart)
                              : f.base->chart();
        merge_chart(c);
      }
      for (const auto& a : m.odds)
        merge_chart(a.kind == SymKind::Param ? kChartNone : a.chart);
    }
  }

  void merge_chart(uint8_t c) {
    if (c == kChartNone) return;
    if (chart_ == kChartNone) {
      chart_ = c;
    } else if (chart_ != c) {
      raise(ErrorKind::ChartMix, "expression mixes atoms from charts '" +
                                     std::string(chart_info(chart_).name) + "' and '" +
                                     std::string(chart_info(c).name) + "'");
    }
  }

  std::vector<Monomial> terms_;
  uint8_t chart_ = kChartNone;
};

inline int expr_compare(const Expr& a, const Expr& b) {
  const auto& ta = a.terms();
  const auto& tb = b.terms();
  if (ta.size() != tb.size()) return ta.size() < tb.size() ? -1 : 1;
  for (size_t i = 0; i < ta.size(); ++i) {
    int c = monomial_key_compare(ta[i], tb[i]);
    if (c != 0) return c;
    c = ta[i].coeff.compare(tb[i].coeff);
    if (c != 0) return c;
  }
  return 0;
}

inline void check_chart_compatible(const Expr& a, const Expr& b) {
  if (a.chart() != kChartNone && b.chart() != kChartNone && a.chart() != b.chart())
    raise(ErrorKind::ChartMix, "operands live on different charts");
}

// ---------------------------------------------------------------------------
// Ring operations
// ---------------------------------------------------------------------------

inline Expr add(const Expr& a, const Expr& b) {
  check_chart_compatible(a, b);
  std::vector<Monomial> ms;
  ms.reserve(a.terms().size() + b.terms().size());
  ms.insert(ms.end(), a.terms().begin(), a.terms().end());
  ms.insert(ms.end(), b.terms().begin(), b.terms().end());
  return Expr::from_monomials(std::move(ms));
}

inline Expr neg(const Expr& a) {
  std::vector<Monomial> ms = a.terms();
  for (auto& m : ms) m.coeff = -m.coeff;
  return Expr::from_monomials(std::move(ms));
}

inline Expr sub(const Expr& a, const Expr& b) { return add(a, neg(b)); }

inline Expr scale(const Expr& a, const Coeff& z, int c_half = 0) {
  if (z.is_zero()) return Expr::zero();
  std::vector<Monomial> ms = a.terms();
  for (auto& m : ms) {
    m.coeff *= z;
    m.c_half += c_half;
  }
  return Expr::from_monomials(std::move(ms));
}

Expr mul(const Expr& a, const Expr& b);
Expr pow_expr(const Expr& e, const Rational& r, const Assumptions& asm_set);

namespace detail {

// Counts inversions while merging two ascending odd-atom lists. Returns
// false when an atom repeats (the product is zero).
inline bool merge_odds(const std::vector<Atom>& x, const std::vector<Atom>& y,
                       std::vector<Atom>& out, bool& negative) {
  out.clear();
  out.reserve(x.size() + y.size());
  size_t i = 0, j = 0;
  long long crossings = 0;
  while (i < x.size() && j < y.size()) {
    int c = atom_compare(x[i], y[j]);
    if (c == 0) return false;
    if (c < 0) {
      out.push_back(x[i++]);
    } else {
      // y[j] crosses every remaining atom of x
      crossings += static_cast<long long>(x.size() - i);
      out.push_back(y[j++]);
    }
  }
  while (i < x.size()) out.push_back(x[i++]);
  while (j < y.size()) out.push_back(y[j++]);
  negative = (crossings % 2) != 0;
  return true;
}

struct MulResult {
  bool zero = false;
  Monomial mono;
  // Bases whose exponents merged to a positive integer; they must be
  // expanded back into the result by the caller.
  std::vector<std::pair<ExprPtr, long long>> expand;
};

inline MulResult mul_monomials(const Monomial& a, const Monomial& b) {
  MulResult r;
  Monomial m;
  m.coeff = a.coeff * b.coeff;
  m.c_half = a.c_half + b.c_half;
  m.alpha = a.alpha + b.alpha;

  bool negative = false;
  if (!merge_odds(a.odds, b.odds, m.odds, negative)) {
    r.zero = true;
    return r;
  }
  if (negative) m.coeff = -m.coeff;

  size_t i = 0, j = 0;
  while (i < a.factors.size() || j < b.factors.size()) {
    int c;
    if (i >= a.factors.size())
      c = 1;
    else if (j >= b.factors.size())
      c = -1;
    else
      c = factor_base_compare(a.factors[i], b.factors[j]);
    if (c < 0) {
      m.factors.push_back(a.factors[i++]);
    } else if (c > 0) {
      m.factors.push_back(b.factors[j++]);
    } else {
      Factor f = a.factors[i++];
      f.exp += b.factors[j++].exp;
      if (f.exp == 0) continue;
      if (!f.is_atom && f.exp > 0 && is_integer(f.exp)) {
        r.expand.emplace_back(f.base, to_int64_exact(f.exp, "merged base exponent"));
        continue;
      }
      m.factors.push_back(std::move(f));
    }
  }

  if (!Expr::fold_units(m)) {
    r.zero = true;
    return r;
  }
  r.mono = std::move(m);
  return r;
}

}  // namespace detail

inline Expr mul(const Expr& a, const Expr& b) {
  if (a.is_zero() || b.is_zero()) return Expr::zero();
  check_chart_compatible(a, b);
  std::vector<Monomial> out;
  std::vector<Expr> deferred;
  out.reserve(a.terms().size() * b.terms().size());
  for (const auto& ma : a.terms()) {
    for (const auto& mb : b.terms()) {
      detail::MulResult r = detail::mul_monomials(ma, mb);
      if (r.zero) continue;
      if (r.expand.empty()) {
        out.push_back(std::move(r.mono));
      } else {
        Expr piece = Expr::from_monomials({std::move(r.mono)});
        for (const auto& [base, n] : r.expand)
          for (long long k = 0; k < n; ++k) piece = mul(piece, *base);
        deferred.push_back(std::move(piece));
      }
    }
  }
  Expr result = Expr::from_monomials(std::move(out));
  for (const auto& piece : deferred) result = add(result, piece);
  return result;
}

inline Expr mul(const Expr& a, const Expr& b, const Expr& c) { return mul(mul(a, b), c); }

inline Expr operator+(const Expr& a, const Expr& b) { return add(a, b); }
inline Expr operator-(const Expr& a, const Expr& b) { return sub(a, b); }
inline Expr operator-(const Expr& a) { return neg(a); }
inline Expr operator*(const Expr& a, const Expr& b) { return mul(a, b); }

// ---------------------------------------------------------------------------
// Powers, nilpotent resolution, content extraction
// ---------------------------------------------------------------------------

namespace detail {

inline Rational binom_rational(const Rational& r, long long k) {
  Rational acc(1);
  for (long long j = 0; j < k; ++j) {
    acc *= (r - Rational(j));
    acc /= Rational(j + 1);
  }
  return acc;
}

// Splits e into body (odd-free, marker-free terms) and nilpotent remainder.
inline void split_body_nilpotent(const Expr& e, std::vector<Monomial>& body,
                                 std::vector<Monomial>& nil) {
  for (const auto& m : e.terms()) {
    bool nilpotent = !m.odds.empty();
    if (!nilpotent)
      for (const auto& f : m.factors)
        if (f.is_atom && f.atom.marker) nilpotent = true;
    (nilpotent ? nil : body).push_back(m);
  }
}

// Factorization with small trial division. Oversized leftovers are kept as a
// single composite unit; extraction then just leaves them inside the base,
// which is deterministic on both sides of any comparison.
inline std::vector<std::pair<BigInt, long long>> factor_small(BigInt n) {
  std::vector<std::pair<BigInt, long long>> out;
  if (n <= 1) return out;
  long long p = 2;
  while (p <= 65536 && BigInt(p) * p <= n) {
    if (n % p == 0) {
      long long e = 0;
      while (n % p == 0) { n /= p; ++e; }
      out.emplace_back(BigInt(p), e);
    }
    p = (p == 2) ? 3 : p + 2;
  }
  if (n > 1) {
    BigInt root = boost::multiprecision::sqrt(n);
    if (root * root == n)
      out.emplace_back(root, 2);  // good enough: exposes the square part
    else
      out.emplace_back(n, 1);
  }
  return out;
}

struct ContentSplit {
  // multiplier = content^r, expressed in the coefficient field plus formal
  // constant roots; base = e / content.
  Coeff coeff_mul{1};
  int c_half_mul = 0;
  std::vector<Factor> const_surds;
  Expr base;
};

inline long long coeff_v2half(const Coeff& z) {
  long long v = INT64_MAX;
  if (z.a != 0) v = std::min(v, 2 * valuation2(z.a));
  if (z.b != 0) v = std::min(v, 2 * valuation2(z.b));
  if (z.d != 0) v = std::min(v, 2 * valuation2(z.d) + 1);
  if (z.e != 0) v = std::min(v, 2 * valuation2(z.e) + 1);
  return v;
}

inline Rational coeff_odd_gcd(const Coeff& z) {
  Rational g(0);
  for (const Rational* q : {&z.a, &z.b, &z.d, &z.e}) {
    if (*q == 0) continue;
    Rational o = odd_part(*q);
    if (o < 0) o = -o;
    g = (g == 0) ? o : gcd_rational(g, o);
  }
  return g;
}

inline long long floor_ll(long long a, long long b) {
  long long q = a / b;
  if (a % b != 0 && ((a < 0) != (b < 0))) --q;
  return q;
}

// Divides z by 2^(v2/2) * g (exact).
inline Coeff coeff_divide_content(const Coeff& z, long long v2half, const Rational& g) {
  Coeff w = z;
  // remove odd content
  if (g != 1) {
    w.a /= g; w.b /= g; w.d /= g; w.e /= g;
  }
  // remove 2^(v2half/2): even part divides rationals, odd part swaps the
  // sqrt(2) components ( / sqrt(2) maps a+bi+d r2+e i r2 -> d+ei+(a/2)r2+(b/2)i r2 )
  long long whole = floor_ll(v2half, 2);
  bool half = (v2half - 2 * whole) != 0;
  Rational scale = pow_rational(Rational(2), whole);
  w.a /= scale; w.b /= scale; w.d /= scale; w.e /= scale;
  if (half) {
    Coeff t;
    t.a = w.d; t.b = w.e;
    t.d = w.a / 2; t.e = w.b / 2;
    w = t;
  }
  return w;
}

// Extracts the largest content of e whose r-th power stays inside the
// coefficient field extended by formal constant roots. q = denominator of r.
inline ContentSplit extract_content(const Expr& e, const Rational& r) {
  ContentSplit out;
  long long p = static_cast<long long>(num(r));
  long long q = static_cast<long long>(den(r));

  int min_ch = INT32_MAX;
  long long min_v2 = INT64_MAX;
  Rational g(0);
  for (const auto& m : e.terms()) {
    min_ch = std::min(min_ch, m.c_half);
    min_v2 = std::min(min_v2, coeff_v2half(m.coeff));
    Rational og = coeff_odd_gcd(m.coeff);
    g = (g == 0) ? og : gcd_rational(g, og);
  }

  long long ch_ext = q * floor_ll(min_ch, q);
  long long v2_ext = q * floor_ll(min_v2, q);

  // Odd rational content g: extract prime powers divisible by q; the
  // remainder (exponents in [0,q)) becomes formal constant roots.
  Rational g_ext(1);
  BigInt residue_num(1), residue_den(1);
  if (g != 1 && g != 0) {
    BigInt gn = num(g), gd = den(g);
    if (gn > BigInt(1) << 62 || gd > BigInt(1) << 62) {
      g_ext = 1;  // oversized: leave inside the base
    } else {
      for (const auto& [prime, exp] : factor_small(gn)) {
        long long keep = q * floor_ll(exp, q);
        g_ext *= pow_rational(Rational(prime), keep);
        for (long long k = 0; k < exp - keep; ++k) residue_num *= prime;
      }
      for (const auto& [prime, exp] : factor_small(gd)) {
        long long keep = q * floor_ll(exp, q);
        g_ext /= pow_rational(Rational(prime), keep);
        for (long long k = 0; k < exp - keep; ++k) residue_den *= prime;
      }
    }
  }

  // content = 2^(v2_ext/2) * g_ext * residue * c^(ch_ext/2)
  // multiplier = content^r
  out.c_half_mul = static_cast<int>(ch_ext * p / q);
  out.coeff_mul = Coeff::sqrt2_power(v2_ext * p / q);
  {
    // g_ext^r = g_ext^(p/q), exact by construction
    Rational ge(1);
    BigInt gen = num(g_ext), ged = den(g_ext);
    for (const auto& [prime, exp] : factor_small(gen)) ge *= pow_rational(Rational(prime), exp * p / q);
    for (const auto& [prime, exp] : factor_small(ged)) ge /= pow_rational(Rational(prime), exp * p / q);
    out.coeff_mul *= Coeff::rational(ge);
  }
  // residue^(p/q): integer part of p/q folds to a rational, the fractional
  // part becomes Pow(K, frac) with K = residue_num * residue_den^(q-1).
  Rational residue(residue_num, residue_den);
  if (residue != 1) {
    long long pw = floor_ll(p, q);
    long long pf = p - pw * q;  // in [0,q)
    out.coeff_mul *= Coeff::rational(pow_rational(residue, pw));
    if (pf != 0) {
      BigInt K = residue_num;
      for (long long k = 0; k + 1 < q; ++k) K *= residue_den;
      out.coeff_mul *= Coeff::rational(pow_rational(Rational(1, residue_den), pf));
      Factor f;
      f.is_atom = false;
      f.base = std::make_shared<Expr>(Expr::rational(Rational(K)));
      f.exp = Rational(pf, q);
      out.const_surds.push_back(std::move(f));
    }
  }

  std::vector<Monomial> ms = e.terms();
  Rational divisor = g_ext * residue;
  for (auto& m : ms) {
    m.c_half -= static_cast<int>(ch_ext);
    m.coeff = coeff_divide_content(m.coeff, v2_ext, divisor);
  }
  out.base = Expr::from_monomials(std::move(ms));
  return out;
}

inline bool base_all_positive(const Expr& base, const Assumptions& asm_set);

// Whether x^k may be rewritten as x^(k*r) when raising to the non-integer
// power r. Safe when the base is declared positive, when k is odd (x^k >= 0
// already forces x >= 0 on the domain of definition), when k is fractional
// (the existing root forced a nonnegative x at creation), or when the
// resulting exponent is even (both sides are |x|^(k r)).
inline bool compose_ok(const Rational& k, const Rational& r, bool positive) {
  if (positive) return true;
  if (!is_integer(k)) return true;
  if (num(k) % 2 != 0) return true;
  Rational kr = k * r;
  return is_integer(kr) && num(kr) % 2 == 0;
}

}  // namespace detail

void collect_atoms(const Expr& e, std::set<std::pair<std::string, Atom>>& out);

namespace detail {
inline bool base_all_positive(const Expr& base, const Assumptions& asm_set) {
  std::set<std::pair<std::string, Atom>> atoms;
  collect_atoms(base, atoms);
  if (atoms.empty()) return false;
  for (const auto& [name, a] : atoms)
    if (!asm_set.is_positive(a)) return false;
  return true;
}
}  // namespace detail

// e^r in canonical form. Sums with nilpotent parts are resolved by the
// finite binomial series (truncation is computed, never assumed); pure
// bodies become opaque power factors after content extraction; single
// monomials distribute over their factors when the square-root branch
// allows it.
inline Expr pow_expr(const Expr& e, const Rational& r, const Assumptions& asm_set) {
  if (r == 0) return Expr::one();
  if (r == 1) return e;
  if (e.is_zero()) {
    if (r < 0) raise(ErrorKind::ZeroDivision, "zero base with negative exponent");
    return Expr::zero();
  }

  if (is_integer(r) && r > 0) {
    long long n = to_int64_exact(r, "power");
    Expr acc = Expr::one();
    Expr base = e;
    while (n > 0) {
      if (n & 1) acc = mul(acc, base);
      base = (n >>= 1) ? mul(base, base) : base;
    }
    return acc;
  }

  // Negative or fractional exponent: split off the nilpotent part first.
  std::vector<Monomial> body_terms, nil_terms;
  detail::split_body_nilpotent(e, body_terms, nil_terms);

  if (!nil_terms.empty()) {
    for (const auto& m : nil_terms)
      if (m.parity() == Parity::Odd)
        raise(ErrorKind::OddBase, "power base is not Grassmann-even");
    Expr body = Expr::from_monomials(std::move(body_terms));
    Expr nil = Expr::from_monomials(std::move(nil_terms));
    if (body.is_zero())
      raise(ErrorKind::OddBase,
            "power base is purely nilpotent; no body to expand around");
    Expr acc = Expr::zero();
    Expr nil_pow = Expr::one();
    for (long long k = 0;; ++k) {
      if (k > 64) raise(ErrorKind::NonNilpotent, "nilpotent part failed to vanish");
      Expr term = scale(mul(pow_expr(body, r - Rational(k), asm_set), nil_pow),
                        Coeff(detail::binom_rational(r, k)));
      acc = add(acc, term);
      nil_pow = mul(nil_pow, nil);
      if (nil_pow.is_zero()) break;
    }
    return acc;
  }

  Expr body = Expr::from_monomials(std::move(body_terms));

  // Single monomial: distribute the exponent over the factors when legal.
  if (body.terms().size() == 1) {
    const Monomial& m = body.terms()[0];
    bool splittable = m.alpha == 0;
    if (!is_integer(r)) {
      // coefficient must be a positive single-component value
      bool coeff_ok =
          (m.coeff.is_rational() && m.coeff.a > 0) ||
          (m.coeff.a == 0 && m.coeff.b == 0 && m.coeff.e == 0 && m.coeff.d > 0);
      if (!coeff_ok) splittable = false;
      for (const auto& f : m.factors) {
        bool positive = f.is_atom ? asm_set.is_positive(f.atom)
                                  : detail::base_all_positive(*f.base, asm_set);
        if (!detail::compose_ok(f.exp, r, positive)) splittable = false;
      }
    }
    if (!m.odds.empty()) {
      if (is_integer(r) && r >= 2) return Expr::zero();
      raise(ErrorKind::OddBase, "odd monomial raised to negative or fractional power");
    }
    for (const auto& f : m.factors)
      if (f.is_atom && f.atom.marker)
        raise(ErrorKind::OddBase, "nilpotent marker raised to negative or fractional power");

    if (is_integer(r) || splittable) {
      // coefficient^r
      Monomial out;
      std::vector<std::pair<ExprPtr, long long>> expand;
      if (is_integer(r)) {
        long long n = to_int64_exact(r, "power");
        out.coeff = m.coeff.pow_int(n);
        out.c_half = m.c_half * static_cast<int>(n);
      } else {
        Expr coeff_expr = Expr::constant(m.coeff, m.c_half);
        detail::ContentSplit cs = detail::extract_content(coeff_expr, r);
        // after extraction the leftover must be exactly 1 for a clean split
        if (!cs.base.is_one()) {
          Factor f;
          f.is_atom = false;
          f.base = std::make_shared<Expr>(std::move(cs.base));
          f.exp = r;
          cs.const_surds.push_back(std::move(f));
        }
        out.coeff = cs.coeff_mul;
        out.c_half = cs.c_half_mul;
        for (auto& f : cs.const_surds) out.factors.push_back(std::move(f));
      }
      for (const auto& f : m.factors) {
        Factor nf = f;
        nf.exp = f.exp * r;
        if (nf.exp == 0) continue;
        if (!nf.is_atom && nf.exp > 0 && is_integer(nf.exp)) {
          expand.emplace_back(nf.base, to_int64_exact(nf.exp, "expanded power"));
          continue;
        }
        out.factors.push_back(std::move(nf));
      }
      std::sort(out.factors.begin(), out.factors.end(),
                [](const Factor& a, const Factor& b) { return factor_compare(a, b) < 0; });
      if (!Expr::fold_units(out)) return Expr::zero();
      Expr result = Expr::from_monomials({std::move(out)});
      for (const auto& [bp, n] : expand)
        for (long long k = 0; k < n; ++k) result = mul(result, *bp);
      return result;
    }
    // fall through: keep the whole monomial as an opaque base
  }

  detail::ContentSplit cs = detail::extract_content(body, r);
  Monomial out;
  out.coeff = cs.coeff_mul;
  out.c_half = cs.c_half_mul;
  out.factors = std::move(cs.const_surds);
  if (!cs.base.is_one()) {
    Factor f;
    // A bare atom stays an atom factor so that x^(1/2) has one encoding.
    const auto& bts = cs.base.terms();
    if (bts.size() == 1 && bts[0].coeff.is_one() && bts[0].c_half == 0 &&
        bts[0].alpha == 0 && bts[0].odds.empty() && bts[0].factors.size() == 1 &&
        bts[0].factors[0].is_atom && bts[0].factors[0].exp == 1) {
      f.is_atom = true;
      f.atom = bts[0].factors[0].atom;
    } else {
      f.is_atom = false;
      f.base = std::make_shared<Expr>(std::move(cs.base));
    }
    f.exp = r;
    out.factors.push_back(std::move(f));
  }
  std::sort(out.factors.begin(), out.factors.end(),
            [](const Factor& a, const Factor& b) { return factor_compare(a, b) < 0; });
  if (!Expr::fold_units(out)) return Expr::zero();
  return Expr::from_monomials({std::move(out)});
}

// Nilpotent resolution happens at construction, so on engine output this is
// the identity; re-running it applies assumption-dependent root collapses to
// values built under weaker assumptions.
inline Expr canonicalize(const Expr& e, const Assumptions& asm_set) {
  Expr acc = Expr::zero();
  for (const auto& m : e.terms()) {
    Expr piece = Expr::constant(m.coeff, m.c_half, m.alpha);
    for (const auto& f : m.factors) {
      Expr fe = f.is_atom ? Expr::from_atom(f.atom) : *f.base;
      piece = mul(piece, pow_expr(fe, f.exp, asm_set));
    }
    for (const auto& a : m.odds) piece = mul(piece, Expr::from_atom(a));
    acc = add(acc, piece);
  }
  return acc;
}

inline Expr resolve_nilpotent(const Expr& e, const Assumptions& asm_set) {
  return canonicalize(e, asm_set);
}

// Sound equality: true iff a - b canonicalizes to zero, with denominators
// cleared by cross-multiplication (negative-power factors are bodies, hence
// not zero divisors, so the test is an equivalence). Never true for
// inequivalent expressions; a nonzero residual means "not proven equal".
inline bool equals(const Expr& a, const Expr& b, const Assumptions& asm_set) {
  Expr diff = sub(canonicalize(a, asm_set), canonicalize(b, asm_set));
  if (diff.is_zero()) return true;
  for (int round = 0; round < 3 && !diff.is_zero(); ++round) {
    // most negative exponent per factor key
    std::vector<Factor> clear;
    for (const auto& m : diff.terms()) {
      for (const auto& f : m.factors) {
        if (f.exp >= 0) continue;
        bool found = false;
        for (auto& g : clear) {
          if (factor_base_compare(f, g) == 0) {
            found = true;
            if (f.exp < g.exp) g.exp = f.exp;
          }
        }
        if (!found) clear.push_back(f);
      }
    }
    if (clear.empty()) break;
    for (const auto& f : clear) {
      Expr base = f.is_atom ? Expr::from_atom(f.atom) : *f.base;
      diff = mul(diff, pow_expr(base, -f.exp, asm_set));
    }
  }
  return diff.is_zero();
}

// ---------------------------------------------------------------------------
// Derivatives and substitution
// ---------------------------------------------------------------------------

Expr coord_derive(const Expr& e, uint8_t chart, int coord);

namespace detail {

inline Expr derive_atom(const Atom& a, uint8_t chart, int coord) {
  switch (a.kind) {
    case SymKind::Param:
      return Expr::zero();
    case SymKind::Coord:
      if (a.chart != chart) raise(ErrorKind::ChartMix, "coordinate atom from another chart");
      return sym_name(a.name) == chart_info(chart).coord_name[coord] ? Expr::one()
                                                                     : Expr::zero();
    case SymKind::Field: {
      if (a.chart != kChartNone && a.chart != chart)
        raise(ErrorKind::ChartMix, "field atom from another chart");
      Atom d = a;
      d.chart = chart;
      if (d.d[coord] == 255) raise(ErrorKind::Internal, "derivative order overflow");
      d.d[coord] = static_cast<uint8_t>(d.d[coord] + 1);
      return Expr::from_atom(d);
    }
  }
  return Expr::zero();
}

}  // namespace detail

// Linear Leibniz derivative along a chart coordinate. The operator is even,
// so it passes through odd atoms without signs.
inline Expr coord_derive(const Expr& e, uint8_t chart, int coord) {
  if (e.chart() != kChartNone && e.chart() != chart)
    raise(ErrorKind::ChartMix, "derivative coordinate from another chart");
  Expr acc = Expr::zero();
  for (const auto& m : e.terms()) {
    // factor sites
    for (size_t i = 0; i < m.factors.size(); ++i) {
      const Factor& f = m.factors[i];
      Expr dsite;
      if (f.is_atom) {
        Expr da = detail::derive_atom(f.atom, chart, coord);
        if (da.is_zero()) continue;
        // d(x^k) = k x^(k-1) dx
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
        dsite = mul(Expr::from_monomials({std::move(rest)}), da);
      } else {
        Expr db = coord_derive(*f.base, chart, coord);
        if (db.is_zero()) continue;
        Monomial rest;
        rest.coeff = m.coeff * Coeff(Rational(f.exp));
        rest.c_half = m.c_half;
        rest.alpha = m.alpha;
        for (size_t j = 0; j < m.factors.size(); ++j) {
          if (j == i) {
            Factor nf = f;
            nf.exp = f.exp - 1;
            if (nf.exp != 0) rest.factors.push_back(std::move(nf));
          } else {
            rest.factors.push_back(m.factors[j]);
          }
        }
        rest.odds = m.odds;
        std::sort(rest.factors.begin(), rest.factors.end(),
                  [](const Factor& a, const Factor& b) { return factor_compare(a, b) < 0; });
        dsite = mul(Expr::from_monomials({std::move(rest)}), db);
      }
      acc = add(acc, dsite);
    }
    // odd sites
    for (size_t i = 0; i < m.odds.size(); ++i) {
      Expr da = detail::derive_atom(m.odds[i], chart, coord);
      if (da.is_zero()) continue;
      Monomial head;
      head.coeff = m.coeff;
      head.c_half = m.c_half;
      head.alpha = m.alpha;
      head.factors = m.factors;
      head.odds.assign(m.odds.begin(), m.odds.begin() + i);
      Expr piece = Expr::from_monomials({std::move(head)});
      piece = mul(piece, da);
      for (size_t j = i + 1; j < m.odds.size(); ++j)
        piece = mul(piece, Expr::from_atom(m.odds[j]));
      acc = add(acc, piece);
    }
  }
  return acc;
}

// Simultaneous substitution of fields (and parameters) by expressions.
// Derivative atoms of a bound field are replaced by coordinate derivatives
// of the replacement; replacements are not re-substituted.
inline Expr substitute(const Expr& e, const std::map<uint32_t, Expr>& bindings,
                       const Assumptions& asm_set) {
  auto replacement_for = [&](const Atom& a) -> std::optional<Expr> {
    auto it = bindings.find(a.name);
    if (it == bindings.end()) return std::nullopt;
    if (a.kind == SymKind::Coord)
      raise(ErrorKind::ParityMismatch, "explicit coordinates cannot be substituted");
    std::optional<Parity> rp = it->second.parity();
    if (!it->second.is_zero() && (!rp.has_value() || *rp != a.parity))
      raise(ErrorKind::ParityMismatch,
            "replacement for '" + sym_name(a.name) + "' has the wrong parity");
    Expr rep = it->second;
    for (int coord = 0; coord < 2; ++coord)
      for (int k = 0; k < a.d[coord]; ++k) rep = coord_derive(rep, a.chart, coord);
    return rep;
  };

  Expr acc = Expr::zero();
  for (const auto& m : e.terms()) {
    Expr piece = Expr::constant(m.coeff, m.c_half, m.alpha);
    for (const auto& f : m.factors) {
      if (f.is_atom) {
        auto rep = replacement_for(f.atom);
        if (rep)
          piece = mul(piece, pow_expr(*rep, f.exp, asm_set));
        else {
          Monomial single;
          single.factors.push_back(f);
          piece = mul(piece, Expr::from_monomials({std::move(single)}));
        }
      } else {
        Expr nb = substitute(*f.base, bindings, asm_set);
        piece = mul(piece, pow_expr(nb, f.exp, asm_set));
      }
    }
    for (const auto& a : m.odds) {
      auto rep = replacement_for(a);
      piece = mul(piece, rep ? *rep : Expr::from_atom(a));
    }
    acc = add(acc, piece);
  }
  return acc;
}

// Replaces one specific atom (exact derivative multi-index) by an expression,
// treating all other atoms as independent.
inline Expr subst_atom(const Expr& e, const Atom& target, const Expr& rep,
                       const Assumptions& asm_set) {
  std::optional<Parity> rp = rep.parity();
  if (!rep.is_zero() && (!rp.has_value() || *rp != target.parity))
    raise(ErrorKind::ParityMismatch, "replacement for atom '" + atom_str(target) +
                                         "' has the wrong parity");
  Expr acc = Expr::zero();
  for (const auto& m : e.terms()) {
    Expr piece = Expr::constant(m.coeff, m.c_half, m.alpha);
    for (const auto& f : m.factors) {
      if (f.is_atom) {
        if (f.atom == target) {
          piece = mul(piece, pow_expr(rep, f.exp, asm_set));
        } else {
          Monomial single;
          single.factors.push_back(f);
          piece = mul(piece, Expr::from_monomials({std::move(single)}));
        }
      } else {
        Expr nb = subst_atom(*f.base, target, rep, asm_set);
        piece = mul(piece, pow_expr(nb, f.exp, asm_set));
      }
    }
    for (const auto& a : m.odds)
      piece = mul(piece, a == target ? rep : Expr::from_atom(a));
    acc = add(acc, piece);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Queries and rendering
// ---------------------------------------------------------------------------

inline void collect_atoms(const Expr& e, std::set<std::pair<std::string, Atom>>& out) {
  for (const auto& m : e.terms()) {
    for (const auto& f : m.factors) {
      if (f.is_atom)
        out.emplace(atom_str(f.atom), f.atom);
      else
        collect_atoms(*f.base, out);
    }
    for (const auto& a : m.odds) out.emplace(atom_str(a), a);
  }
}

inline bool contains_field(const Expr& e, uint32_t name) {
  std::set<std::pair<std::string, Atom>> atoms;
  collect_atoms(e, atoms);
  for (const auto& [s, a] : atoms)
    if (a.name == name) return true;
  return false;
}

// Conjugation of the coefficient field (i -> -i); atoms, alpha and c are real.
inline Expr coeff_conj(const Expr& e) {
  std::vector<Monomial> ms = e.terms();
  for (auto& m : ms) m.coeff = m.coeff.conj();
  return Expr::from_monomials(std::move(ms));
}

inline bool coeff_is_i_free(const Expr& e) {
  for (const auto& m : e.terms()) {
    if (!m.coeff.is_real()) return false;
    for (const auto& f : m.factors)
      if (!f.is_atom && !coeff_is_i_free(*f.base)) return false;
  }
  return true;
}

inline bool c_powers_integer(const Expr& e) {
  for (const auto& m : e.terms()) {
    if (m.c_half % 2 != 0) return false;
    for (const auto& f : m.factors)
      if (!f.is_atom && !c_powers_integer(*f.base)) return false;
  }
  return true;
}

std::string expr_str(const Expr& e);

namespace detail {

inline std::string exponent_str(const Rational& r) {
  if (is_integer(r) && r > 0) return num(r).str();
  return "(" + rational_str(r) + ")";
}

inline std::string factor_str(const Factor& f) {
  if (f.is_atom) {
    std::string a = atom_str(f.atom);
    if (f.exp == 1) return a;
    return a + "^" + exponent_str(f.exp);
  }
  std::string b = expr_str(*f.base);
  if (f.exp == Rational(1, 2)) return "sqrt(" + b + ")";
  return "(" + b + ")^" + exponent_str(f.exp);
}

inline std::string c_power_str(int half) {
  if (half == 0) return "";
  if (half == 2) return "c";
  if (half % 2 == 0) {
    int p = half / 2;
    return p > 0 ? "c^" + std::to_string(p) : "c^(" + std::to_string(p) + ")";
  }
  return "c^(" + std::to_string(half) + "/2)";
}

// Splits a monomial into (negative?, rendered magnitude).
inline std::pair<bool, std::string> monomial_str(const Monomial& m) {
  Coeff z = m.coeff;
  bool negative = false;
  // pull the sign of the first nonzero component out front
  const Rational* lead = nullptr;
  for (const Rational* q : {&z.a, &z.b, &z.d, &z.e})
    if (*q != 0) { lead = q; break; }
  if (lead && *lead < 0) {
    negative = true;
    z = -z;
  }
  std::vector<std::string> pieces;
  std::string cs = coeff_str(z);
  std::string cp = c_power_str(m.c_half);
  bool unit_coeff = (cs == "1");
  bool has_factors = m.c_half != 0 || m.alpha != 0 || !m.factors.empty() || !m.odds.empty();
  if (!unit_coeff) {
    if (has_factors && cs.find('/') != std::string::npos && cs.front() != '(')
      cs = "(" + cs + ")";
    pieces.push_back(cs);
  }
  if (!cp.empty()) pieces.push_back(cp);
  if (m.alpha) pieces.push_back("alpha");
  for (const auto& f : m.factors) pieces.push_back(factor_str(f));
  for (const auto& a : m.odds) pieces.push_back(atom_str(a));
  if (pieces.empty()) pieces.push_back("1");
  std::string out = pieces[0];
  for (size_t i = 1; i < pieces.size(); ++i) out += "*" + pieces[i];
  return {negative, out};
}

}  // namespace detail

// Deterministic infix rendering in canonical term order.
inline std::string expr_str(const Expr& e) {
  if (e.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (const auto& m : e.terms()) {
    auto [negative, body] = detail::monomial_str(m);
    if (first) {
      out += (negative ? "-" : "") + body;
      first = false;
    } else {
      out += (negative ? " - " : " + ") + body;
    }
  }
  return out;
}

}  // namespace gft
