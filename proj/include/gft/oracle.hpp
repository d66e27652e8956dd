#pragma once

#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "gft/expr.hpp"

namespace gft {

// ---------------------------------------------------------------------------
// Exact scalars: Gaussian rationals extended by formal square roots of exact
// body values (s_v with s_v^2 = v) and the normalization unit alpha with
// alpha^2 = -i/(2 c0). No floating point anywhere.
// ---------------------------------------------------------------------------

struct GaussRat {
  Rational re{0}, im{0};

  bool is_zero() const { return re == 0 && im == 0; }
  friend GaussRat operator+(const GaussRat& x, const GaussRat& y) {
    return {x.re + y.re, x.im + y.im};
  }
  friend GaussRat operator-(const GaussRat& x, const GaussRat& y) {
    return {x.re - y.re, x.im - y.im};
  }
  friend GaussRat operator*(const GaussRat& x, const GaussRat& y) {
    return {x.re * y.re - x.im * y.im, x.re * y.im + x.im * y.re};
  }
  GaussRat operator-() const { return {-re, -im}; }
};

// Formal surd content of one scalar term: sqrt(kernel) with kernel a
// squarefree positive integer (1 = no root), times alpha^0 or alpha^1.
// Squarefree kernels are closed under products via gcd extraction, so one
// kernel per term suffices.
struct SurdKey {
  Rational kernel{1};
  int alpha = 0;  // 0 or 1

  friend bool operator<(const SurdKey& a, const SurdKey& b) {
    if (a.alpha != b.alpha) return a.alpha < b.alpha;
    return a.kernel < b.kernel;
  }
  friend bool operator==(const SurdKey& a, const SurdKey& b) {
    return a.alpha == b.alpha && a.kernel == b.kernel;
  }
};

// sum over surd products of Gaussian-rational coefficients
using SurdScalar = std::map<SurdKey, GaussRat>;

struct OracleCtx {
  Rational c_value{5};
};

namespace oracle_detail {

inline void scalar_accum(SurdScalar& s, const SurdKey& k, const GaussRat& v) {
  if (v.is_zero()) return;
  auto it = s.find(k);
  if (it == s.end()) {
    s.emplace(k, v);
  } else {
    it->second = it->second + v;
    if (it->second.is_zero()) s.erase(it);
  }
}

inline SurdScalar scalar_mul(const SurdScalar& x, const SurdScalar& y, const OracleCtx& ctx) {
  SurdScalar out;
  for (const auto& [kx, vx] : x)
    for (const auto& [ky, vy] : y) {
      GaussRat v = vx * vy;
      SurdKey k;
      // sqrt(a) sqrt(b) = gcd(a,b) sqrt(ab / gcd^2)
      BigInt g = boost::multiprecision::gcd(num(kx.kernel), num(ky.kernel));
      v = v * GaussRat{Rational(g), 0};
      k.kernel = (kx.kernel / Rational(g)) * (ky.kernel / Rational(g));
      int alpha = kx.alpha + ky.alpha;
      if (alpha >= 2) {
        // alpha^2 = -i/(2 c0)
        v = v * GaussRat{0, Rational(-1) / (2 * ctx.c_value)};
        alpha -= 2;
      }
      k.alpha = alpha;
      scalar_accum(out, k, v);
    }
  return out;
}

inline SurdScalar scalar_rational(Rational q) {
  SurdScalar s;
  if (q != 0) s.emplace(SurdKey{}, GaussRat{std::move(q), 0});
  return s;
}

inline SurdScalar scalar_surd(const Rational& kernel) {
  SurdScalar s;
  s.emplace(SurdKey{kernel, 0}, GaussRat{1, 0});
  return s;
}

}  // namespace oracle_detail

// Element of the finite Grassmann algebra with SurdScalar coefficients,
// indexed by generator subsets.
struct GrassElem {
  std::map<uint32_t, SurdScalar> parts;

  bool is_zero() const { return parts.empty(); }

  static GrassElem scalar(SurdScalar s) {
    GrassElem e;
    if (!s.empty()) e.parts.emplace(0u, std::move(s));
    return e;
  }
  static GrassElem rational(Rational q) {
    return scalar(oracle_detail::scalar_rational(std::move(q)));
  }
  static GrassElem generator(int g) {
    GrassElem e;
    e.parts.emplace(1u << g, oracle_detail::scalar_rational(1));
    return e;
  }

  void accum(uint32_t mask, const SurdScalar& s) {
    if (s.empty()) return;
    auto it = parts.find(mask);
    if (it == parts.end()) {
      parts.emplace(mask, s);
    } else {
      for (const auto& [k, v] : s) oracle_detail::scalar_accum(it->second, k, v);
      if (it->second.empty()) parts.erase(it);
    }
  }
};

inline GrassElem operator+(const GrassElem& a, const GrassElem& b) {
  GrassElem out = a;
  for (const auto& [m, s] : b.parts) out.accum(m, s);
  return out;
}

inline GrassElem operator-(const GrassElem& a) {
  GrassElem out;
  for (const auto& [m, s] : a.parts) {
    SurdScalar ns;
    for (const auto& [k, v] : s) ns.emplace(k, -v);
    out.parts.emplace(m, std::move(ns));
  }
  return out;
}

inline GrassElem operator-(const GrassElem& a, const GrassElem& b) { return a + (-b); }

inline GrassElem elem_mul(const GrassElem& a, const GrassElem& b, const OracleCtx& ctx) {
  GrassElem out;
  for (const auto& [ma, sa] : a.parts)
    for (const auto& [mb, sb] : b.parts) {
      if (ma & mb) continue;  // repeated generator
      // crossings: pairs (i in ma, j in mb) with i > j
      int crossings = 0;
      uint32_t rest = ma;
      while (rest) {
        uint32_t low = rest & (~rest + 1);
        int bit = __builtin_ctz(low);
        crossings += __builtin_popcount(mb & (low - 1));
        (void)bit;
        rest ^= low;
      }
      SurdScalar s = oracle_detail::scalar_mul(sa, sb, ctx);
      if (crossings % 2 == 1) {
        for (auto& [k, v] : s) v = -v;
      }
      out.accum(ma | mb, s);
    }
  return out;
}

namespace oracle_detail {

// Requires a purely rational scalar element; used for power bases.
inline Rational require_rational(const GrassElem& e, const char* what) {
  if (e.is_zero()) return Rational(0);
  if (e.parts.size() != 1 || e.parts.begin()->first != 0)
    raise(ErrorKind::NegativeBase, std::string(what) + ": power base has a nilpotent part");
  const SurdScalar& s = e.parts.begin()->second;
  if (s.size() != 1 || !(s.begin()->first == SurdKey{}))
    raise(ErrorKind::NegativeBase, std::string(what) + ": power base is not rational");
  if (s.begin()->second.im != 0)
    raise(ErrorKind::NegativeBase, std::string(what) + ": power base is not real");
  return s.begin()->second.re;
}

// sqrt(v) = multiplier * sqrt(kernel) with the square part extracted, so
// that equal values always produce the same formal surd (kernel 1 means the
// root is rational). Uses the same small trial division as the symbolic
// content extraction; oversized leftovers stay atomic, which is consistent
// on both sides of any comparison.
inline std::pair<Rational, Rational> normalized_surd(const Rational& v) {
  BigInt n = num(v) * den(v);
  Rational mult = Rational(1, den(v));
  BigInt square(1), kernel(1);
  for (const auto& [p, e] : detail::factor_small(n)) {
    for (long long k = 0; k < e / 2; ++k) square *= p;
    if (e % 2) kernel *= p;
  }
  mult *= Rational(square);
  return {mult, Rational(kernel)};
}

// v^r for rational v and half-integer r; roots adjoin the formal surd s_v.
inline SurdScalar rational_pow(const Rational& v, const Rational& r, const char* what) {
  long long q = static_cast<long long>(den(r));
  long long p = static_cast<long long>(num(r));
  if (q == 1) {
    if (v == 0 && p < 0) raise(ErrorKind::ZeroDivision, "oracle: zero to negative power");
    return scalar_rational(pow_rational(v, p));
  }
  if (q != 2) raise(ErrorKind::Internal, std::string(what) + ": unsupported root order");
  if (v <= 0)
    raise(ErrorKind::NegativeBase,
          std::string(what) + ": root of non-positive value " + rational_str(v));
  long long whole = (p - ((p % 2) + 2) % 2) / 2;
  SurdScalar s = scalar_rational(pow_rational(v, whole));
  auto [mult, kernel] = normalized_surd(v);
  s = scalar_mul(s, scalar_rational(mult), OracleCtx{});
  if (kernel != 1) s = scalar_mul(s, scalar_surd(kernel), OracleCtx{});
  return s;
}

}  // namespace oracle_detail

namespace oracle_detail {

inline GaussRat gauss_inverse(const GaussRat& z) {
  Rational norm = z.re * z.re + z.im * z.im;
  if (norm == 0) raise(ErrorKind::ZeroDivision, "oracle: inverse of zero");
  return {z.re / norm, -z.im / norm};
}

// Exact inverse of a scalar. Single-term values invert directly (1/s_k =
// s_k/k, 1/alpha = 2 i c0 alpha); multi-term values go through one
// conjugation step per distinct surd component.
inline SurdScalar scalar_inverse(SurdScalar s, const OracleCtx& ctx, int depth = 0) {
  if (s.empty()) raise(ErrorKind::ZeroDivision, "oracle: inverse of zero scalar");
  if (s.size() == 1) {
    const auto& [key, z] = *s.begin();
    GaussRat zi = gauss_inverse(z);
    SurdScalar out;
    SurdKey k = key;
    if (key.kernel != 1) zi = zi * GaussRat{Rational(1) / key.kernel, 0};
    if (key.alpha) {
      // 1/alpha = alpha / alpha^2 = alpha * 2 i c0
      zi = zi * GaussRat{0, 2 * ctx.c_value};
    }
    out.emplace(k, zi);
    return out;
  }
  if (depth > 8) raise(ErrorKind::Internal, "oracle: scalar inverse did not terminate");
  // conjugate with respect to the last (largest) key component
  SurdKey pivot = s.rbegin()->first;
  SurdScalar conj;
  for (const auto& [k, v] : s) conj.emplace(k, k == pivot ? -v : v);
  SurdScalar denom = scalar_mul(s, conj, ctx);
  return scalar_mul(conj, scalar_inverse(std::move(denom), ctx, depth + 1), ctx);
}

}  // namespace oracle_detail

// (body + nilpotent)^r via the finite binomial series. Root exponents need
// a positive rational body; integer exponents admit exact surd bodies.
inline GrassElem elem_pow(const GrassElem& e, const Rational& r, const OracleCtx& ctx) {
  if (r == 0) return GrassElem::rational(1);
  if (is_integer(r) && r > 0) {
    long long n = to_int64_exact(r, "oracle power");
    GrassElem acc = GrassElem::rational(1);
    for (long long k = 0; k < n; ++k) acc = elem_mul(acc, e, ctx);
    return acc;
  }
  GrassElem body_elem, nil;
  for (const auto& [m, s] : e.parts)
    (m == 0 ? body_elem : nil).parts.emplace(m, s);

  if (is_integer(r)) {
    // (sigma + eta)^-1 = sigma^-1 sum_k (-eta sigma^-1)^k, then repeat
    if (body_elem.is_zero()) raise(ErrorKind::ZeroDivision, "oracle: zero body in power");
    SurdScalar sigma_inv =
        oracle_detail::scalar_inverse(body_elem.parts.begin()->second, ctx);
    GrassElem inv = GrassElem::scalar(sigma_inv);
    GrassElem neg_eta_si = -elem_mul(nil, GrassElem::scalar(sigma_inv), ctx);
    GrassElem term = GrassElem::rational(1);
    GrassElem series;
    for (long long k = 0;; ++k) {
      if (k > 64) raise(ErrorKind::NonNilpotent, "oracle: series failed to terminate");
      series = series + term;
      term = elem_mul(term, neg_eta_si, ctx);
      if (term.is_zero()) break;
    }
    inv = elem_mul(inv, series, ctx);
    long long n = -to_int64_exact(r, "oracle power");
    GrassElem acc = GrassElem::rational(1);
    for (long long k = 0; k < n; ++k) acc = elem_mul(acc, inv, ctx);
    return acc;
  }

  Rational v = oracle_detail::require_rational(body_elem, "oracle power");
  if (v == 0) raise(ErrorKind::ZeroDivision, "oracle: zero body in power");
  GrassElem acc;
  GrassElem nil_pow = GrassElem::rational(1);
  for (long long k = 0;; ++k) {
    if (k > 64) raise(ErrorKind::NonNilpotent, "oracle: series failed to terminate");
    Rational binom = detail::binom_rational(r, k);
    SurdScalar coef = oracle_detail::scalar_mul(
        oracle_detail::scalar_rational(binom),
        oracle_detail::rational_pow(v, r - Rational(k), "oracle power"), ctx);
    acc = acc + elem_mul(GrassElem::scalar(coef), nil_pow, ctx);
    nil_pow = elem_mul(nil_pow, nil, ctx);
    if (nil_pow.is_zero()) break;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Assignments
// ---------------------------------------------------------------------------

struct AtomLess {
  bool operator()(const Atom& a, const Atom& b) const { return atom_compare(a, b) < 0; }
};

struct Assignment {
  std::map<Atom, int, AtomLess> odd_generator;
  std::map<Atom, std::pair<int, int>, AtomLess> marker_generators;
  std::map<Atom, Rational, AtomLess> even_value;
  Rational c_value{5};
  int generator_count = 0;

  std::string describe() const {
    std::string out = "c=" + rational_str(c_value);
    for (const auto& [a, v] : even_value) out += ", " + atom_str(a) + "=" + rational_str(v);
    for (const auto& [a, g] : odd_generator)
      out += ", " + atom_str(a) + "=g" + std::to_string(g);
    return out;
  }
};

using ElementOverrides = std::map<Atom, GrassElem, AtomLess>;

GrassElem elem_pow(const GrassElem& e, const Rational& r, const OracleCtx& ctx);

// Exact evaluation of a canonical expression in the Grassmann algebra.
// Overrides substitute whole algebra elements (possibly with nilpotent
// parts) for specific atoms; everything else comes from the assignment.
inline GrassElem oracle_eval(const Expr& e, const Assignment& a,
                             const ElementOverrides& overrides = {}) {
  OracleCtx ctx{a.c_value};
  GrassElem total;
  for (const auto& m : e.terms()) {
    // coefficient: (a + b i) + (d + e i) sqrt(2)
    SurdScalar s;
    oracle_detail::scalar_accum(s, SurdKey{}, GaussRat{m.coeff.a, m.coeff.b});
    oracle_detail::scalar_accum(s, SurdKey{Rational(2), 0}, GaussRat{m.coeff.d, m.coeff.e});
    // c^(c_half/2)
    if (m.c_half != 0)
      s = oracle_detail::scalar_mul(
          s, oracle_detail::rational_pow(a.c_value, Rational(m.c_half, 2), "c power"), ctx);
    if (m.alpha) {
      SurdScalar al;
      al.emplace(SurdKey{Rational(1), 1}, GaussRat{1, 0});
      s = oracle_detail::scalar_mul(s, al, ctx);
    }
    GrassElem acc = GrassElem::scalar(std::move(s));
    for (const auto& f : m.factors) {
      if (f.is_atom) {
        if (auto ov = overrides.find(f.atom); ov != overrides.end()) {
          acc = elem_mul(acc, elem_pow(ov->second, f.exp, ctx), ctx);
          continue;
        }
        if (f.atom.marker) {
          auto it = a.marker_generators.find(f.atom);
          if (it == a.marker_generators.end())
            raise(ErrorKind::UnassignedAtom, "marker '" + atom_str(f.atom) + "' unassigned");
          GrassElem pair = elem_mul(GrassElem::generator(it->second.first),
                                    GrassElem::generator(it->second.second), ctx);
          acc = elem_mul(acc, pair, ctx);  // exponent is 1 in canonical form
          continue;
        }
        auto it = a.even_value.find(f.atom);
        if (it == a.even_value.end())
          raise(ErrorKind::UnassignedAtom, "atom '" + atom_str(f.atom) + "' unassigned");
        acc = elem_mul(acc,
                       GrassElem::scalar(oracle_detail::rational_pow(
                           it->second, f.exp, atom_str(f.atom).c_str())),
                       ctx);
      } else {
        GrassElem bv = oracle_eval(*f.base, a, overrides);
        acc = elem_mul(acc, elem_pow(bv, f.exp, ctx), ctx);
      }
    }
    for (const auto& od : m.odds) {
      auto it = a.odd_generator.find(od);
      if (it == a.odd_generator.end())
        raise(ErrorKind::UnassignedAtom, "odd atom '" + atom_str(od) + "' unassigned");
      acc = elem_mul(acc, GrassElem::generator(it->second), ctx);
    }
    total = total + acc;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Random assignments and equivalence checking
// ---------------------------------------------------------------------------

inline Assignment random_assignment(const std::set<std::pair<std::string, Atom>>& atoms,
                                    const Assumptions& asm_set, std::mt19937_64& rng) {
  Assignment a;
  static const int primes[4] = {5, 7, 11, 13};
  a.c_value = Rational(primes[rng() % 4]);
  std::uniform_int_distribution<int> digit(1, 9);
  int next_gen = 0;
  for (const auto& [name, atom] : atoms) {
    if (atom.parity == Parity::Odd) {
      a.odd_generator.emplace(atom, next_gen++);
    } else if (atom.marker) {
      int g1 = next_gen++;
      int g2 = next_gen++;
      a.marker_generators.emplace(atom, std::make_pair(g1, g2));
    } else {
      Rational v(digit(rng), digit(rng));
      if (!asm_set.is_positive(atom) && (rng() & 1)) v = -v;
      a.even_value.emplace(atom, v);
    }
  }
  a.generator_count = next_gen;
  if (next_gen > 10)
    raise(ErrorKind::Internal, "oracle limited to 10 Grassmann generators");
  return a;
}

struct OracleReport {
  bool equivalent = true;
  int trials = 0;
  std::string witness;  // first failing assignment, empty when equivalent
};

// Draws `trials` admissible random assignments (rejection keeps power bases
// positive) and tests a - b for the exact zero element on each.
inline OracleReport oracle_equiv(const Expr& a, const Expr& b, int trials, uint64_t seed,
                                 const Assumptions& asm_set) {
  OracleReport rep;
  std::set<std::pair<std::string, Atom>> atoms;
  collect_atoms(a, atoms);
  collect_atoms(b, atoms);
  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 rng(seed * 1000003ULL + static_cast<uint64_t>(t) * 7919ULL + 17ULL);
    GrassElem va, vb;
    bool ok = false;
    Assignment assign;
    for (int attempt = 0; attempt < 2000 && !ok; ++attempt) {
      assign = random_assignment(atoms, asm_set, rng);
      try {
        va = oracle_eval(a, assign);
        vb = oracle_eval(b, assign);
        ok = true;
      } catch (const EngineError& err) {
        if (err.kind() != ErrorKind::NegativeBase && err.kind() != ErrorKind::ZeroDivision)
          throw;
      }
    }
    if (!ok)
      raise(ErrorKind::NegativeBase,
            "oracle could not find an admissible assignment in 2000 attempts");
    ++rep.trials;
    if (!(va - vb).is_zero()) {
      rep.equivalent = false;
      rep.witness = assign.describe();
      return rep;
    }
  }
  return rep;
}

}  // namespace gft
