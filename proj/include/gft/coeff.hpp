#pragma once

#include <string>

#include "gft/rational.hpp"

namespace gft {

// Element of Q(i, sqrt(2)): a + b*i + d*sqrt(2) + e*i*sqrt(2).
// This is the numeric part of a monomial coefficient; powers of c^(1/2) and
// the gauge normalization unit alpha are tracked next to it in the monomial.
struct Coeff {
  Rational a{0}, b{0}, d{0}, e{0};

  Coeff() = default;
  Coeff(Rational re) : a(std::move(re)) {}
  Coeff(long long re) : a(re) {}
  static Coeff rational(Rational q) { return Coeff(std::move(q)); }
  static Coeff imaginary(Rational q = Rational(1)) {
    Coeff z;
    z.b = std::move(q);
    return z;
  }
  static Coeff sqrt2(Rational q = Rational(1)) {
    Coeff z;
    z.d = std::move(q);
    return z;
  }

  bool is_zero() const { return a == 0 && b == 0 && d == 0 && e == 0; }
  bool is_one() const { return a == 1 && b == 0 && d == 0 && e == 0; }
  bool is_rational() const { return b == 0 && d == 0 && e == 0; }
  bool is_real() const { return b == 0 && e == 0; }
  bool has_sqrt2() const { return d != 0 || e != 0; }

  Coeff operator-() const {
    Coeff z;
    z.a = -a; z.b = -b; z.d = -d; z.e = -e;
    return z;
  }

  Coeff& operator+=(const Coeff& o) {
    a += o.a; b += o.b; d += o.d; e += o.e;
    return *this;
  }
  Coeff& operator-=(const Coeff& o) {
    a -= o.a; b -= o.b; d -= o.d; e -= o.e;
    return *this;
  }

  friend Coeff operator+(Coeff x, const Coeff& y) { return x += y; }
  friend Coeff operator-(Coeff x, const Coeff& y) { return x -= y; }

  friend Coeff operator*(const Coeff& x, const Coeff& y) {
    Coeff z;
    z.a = x.a * y.a - x.b * y.b + 2 * x.d * y.d - 2 * x.e * y.e;
    z.b = x.a * y.b + x.b * y.a + 2 * x.d * y.e + 2 * x.e * y.d;
    z.d = x.a * y.d + x.d * y.a - x.b * y.e - x.e * y.b;
    z.e = x.a * y.e + x.e * y.a + x.b * y.d + x.d * y.b;
    return z;
  }
  Coeff& operator*=(const Coeff& o) { return *this = *this * o; }

  friend bool operator==(const Coeff& x, const Coeff& y) {
    return x.a == y.a && x.b == y.b && x.d == y.d && x.e == y.e;
  }
  friend bool operator!=(const Coeff& x, const Coeff& y) { return !(x == y); }

  // Complex conjugation; sqrt(2) is real, i flips sign.
  Coeff conj() const {
    Coeff z;
    z.a = a; z.b = -b; z.d = d; z.e = -e;
    return z;
  }

  Coeff inverse() const {
    if (is_zero()) raise(ErrorKind::ZeroDivision, "inverse of zero coefficient");
    // z * conj_i(z) is i-free: A + D*sqrt(2).
    Coeff ci = conj();
    Coeff w = *this * ci;
    Rational A = w.a, D = w.d;
    Rational norm = A * A - 2 * D * D;
    if (norm == 0) raise(ErrorKind::Internal, "coefficient norm vanished");
    Coeff w_conj;  // A - D*sqrt(2)
    w_conj.a = A; w_conj.d = -D;
    Coeff inv = ci * w_conj;
    inv.a /= norm; inv.b /= norm; inv.d /= norm; inv.e /= norm;
    return inv;
  }

  friend Coeff operator/(const Coeff& x, const Coeff& y) { return x * y.inverse(); }

  Coeff pow_int(long long k) const {
    if (k < 0) return inverse().pow_int(-k);
    Coeff acc(1);
    Coeff base = *this;
    long long n = k;
    while (n > 0) {
      if (n & 1) acc *= base;
      base *= base;
      n >>= 1;
    }
    return acc;
  }

  // i^m for m in Z.
  static Coeff i_power(long long m) {
    long long r = ((m % 4) + 4) % 4;
    switch (r) {
      case 0: return Coeff(1);
      case 1: return Coeff::imaginary();
      case 2: return Coeff(-1);
      default: return Coeff::imaginary(Rational(-1));
    }
  }

  // (sqrt 2)^s for s in Z.
  static Coeff sqrt2_power(long long s) {
    bool odd = (s % 2 + 2) % 2 == 1;
    long long half = (s - (odd ? 1 : 0)) / 2;
    Coeff z = Coeff::rational(pow_rational(Rational(2), half));
    if (odd) z *= Coeff::sqrt2();
    return z;
  }

  int compare(const Coeff& o) const {
    if (a != o.a) return a < o.a ? -1 : 1;
    if (b != o.b) return b < o.b ? -1 : 1;
    if (d != o.d) return d < o.d ? -1 : 1;
    if (e != o.e) return e < o.e ? -1 : 1;
    return 0;
  }
};

namespace detail {
inline void append_part(std::string& out, const Rational& q, const char* unit, bool& first) {
  if (q == 0) return;
  Rational mag = q < 0 ? Rational(-q) : q;
  std::string sign = q < 0 ? "-" : "+";
  std::string piece;
  if (mag == 1 && unit[0] != '\0')
    piece = unit;
  else if (unit[0] == '\0')
    piece = rational_str(mag);
  else
    piece = (is_integer(mag) ? rational_str(mag) : "(" + rational_str(mag) + ")") + "*" + unit;
  if (first) {
    out += (q < 0 ? "-" : "") + piece;
    first = false;
  } else {
    out += " " + sign + " " + piece;
  }
}
}  // namespace detail

inline std::string coeff_str(const Coeff& z) {
  if (z.is_zero()) return "0";
  int parts = (z.a != 0) + (z.b != 0) + (z.d != 0) + (z.e != 0);
  std::string body;
  bool first = true;
  detail::append_part(body, z.a, "", first);
  detail::append_part(body, z.b, "I", first);
  detail::append_part(body, z.d, "sqrt(2)", first);
  detail::append_part(body, z.e, "I*sqrt(2)", first);
  if (parts > 1) return "(" + body + ")";
  return body;
}

}  // namespace gft
