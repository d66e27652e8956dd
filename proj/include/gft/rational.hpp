#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>
#include <utility>

#include "gft/errors.hpp"

namespace gft {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Rational make_rational(long long num, long long den = 1) {
  if (den == 0) raise(ErrorKind::ZeroDivision, "rational with zero denominator");
  return Rational(BigInt(num), BigInt(den));
}

inline BigInt num(const Rational& q) { return boost::multiprecision::numerator(q); }
inline BigInt den(const Rational& q) { return boost::multiprecision::denominator(q); }

inline bool is_integer(const Rational& q) { return den(q) == 1; }

inline BigInt floor_div(const BigInt& a, const BigInt& b) {
  BigInt q = a / b;
  if ((a % b) != 0 && ((a < 0) != (b < 0))) --q;
  return q;
}

// floor(q) as BigInt
inline BigInt rational_floor(const Rational& q) { return floor_div(num(q), den(q)); }

inline Rational pow_rational(const Rational& base, long long e) {
  if (e == 0) return Rational(1);
  if (base == 0) {
    if (e < 0) raise(ErrorKind::ZeroDivision, "0 raised to a negative power");
    return Rational(0);
  }
  Rational b = base;
  long long n = e;
  if (n < 0) {
    b = Rational(1) / b;
    n = -n;
  }
  Rational acc(1);
  while (n > 0) {
    if (n & 1) acc *= b;
    b *= b;
    n >>= 1;
  }
  return acc;
}

inline int64_t to_int64_exact(const Rational& q, const char* what) {
  if (!is_integer(q)) raise(ErrorKind::Internal, std::string(what) + ": not an integer");
  return static_cast<int64_t>(num(q));
}

// 2-adic valuation of a nonzero rational (may be negative).
inline long long valuation2(const Rational& q) {
  long long v = 0;
  BigInt n = num(q) < 0 ? BigInt(-num(q)) : num(q);
  BigInt d = den(q);
  while (n % 2 == 0) { n /= 2; ++v; }
  while (d % 2 == 0) { d /= 2; --v; }
  return v;
}

// q with all powers of two removed (sign preserved).
inline Rational odd_part(const Rational& q) {
  BigInt n = num(q), d = den(q);
  while (n != 0 && n % 2 == 0) n /= 2;
  while (d % 2 == 0) d /= 2;
  return Rational(n, d);
}

inline Rational gcd_rational(const Rational& a, const Rational& b) {
  BigInt n = boost::multiprecision::gcd(num(a) < 0 ? BigInt(-num(a)) : num(a),
                                        num(b) < 0 ? BigInt(-num(b)) : num(b));
  BigInt d = boost::multiprecision::lcm(den(a), den(b));
  return Rational(n, d);
}

inline std::string rational_str(const Rational& q) {
  if (is_integer(q)) return num(q).str();
  return num(q).str() + "/" + den(q).str();
}

}  // namespace gft
