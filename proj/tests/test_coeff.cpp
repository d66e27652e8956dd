#include <catch2/catch_amalgamated.hpp>

#include "gft/coeff.hpp"

using namespace gft;

TEST_CASE("i arithmetic folds into the rational sign") {
  Coeff i = Coeff::imaginary();
  CHECK(i * i == Coeff(-1));
  CHECK(i * i * i == Coeff::imaginary(Rational(-1)));
  CHECK(i * i * i * i == Coeff(1));
  CHECK(Coeff::i_power(7) == Coeff::imaginary(Rational(-1)));
}

TEST_CASE("sqrt(2) squares into the rational part") {
  Coeff r2 = Coeff::sqrt2();
  CHECK(r2 * r2 == Coeff(2));
  CHECK(Coeff::sqrt2_power(3) == Coeff::sqrt2(Rational(2)));
  CHECK(Coeff::sqrt2_power(-1) == Coeff::sqrt2(Rational(1, 2)));
  CHECK(Coeff::sqrt2_power(-2) == Coeff(Rational(1, 2)));
}

TEST_CASE("mixed products") {
  Coeff z = Coeff::imaginary() * Coeff::sqrt2();
  CHECK(z * z == Coeff(-2));
  Coeff w = (Coeff(1) + Coeff::imaginary()) * (Coeff(1) - Coeff::imaginary());
  CHECK(w == Coeff(2));
}

TEST_CASE("field inverse") {
  Coeff z;
  z.a = Rational(3);
  z.b = Rational(-1, 2);
  z.d = Rational(2);
  z.e = Rational(1, 3);
  Coeff inv = z.inverse();
  CHECK(z * inv == Coeff(1));

  Coeff r2 = Coeff::sqrt2();
  CHECK(r2.inverse() == Coeff::sqrt2(Rational(1, 2)));
  CHECK(Coeff::imaginary().inverse() == Coeff::imaginary(Rational(-1)));
}

TEST_CASE("conjugation fixes the real part") {
  Coeff z;
  z.a = Rational(1);
  z.b = Rational(2);
  z.d = Rational(3);
  z.e = Rational(4);
  Coeff c = z.conj();
  CHECK(c.a == Rational(1));
  CHECK(c.b == Rational(-2));
  CHECK(c.d == Rational(3));
  CHECK(c.e == Rational(-4));
  CHECK((z * z.conj()).is_real());
}

TEST_CASE("rendering") {
  CHECK(coeff_str(Coeff(1)) == "1");
  CHECK(coeff_str(Coeff(Rational(-3, 2))) == "-3/2");
  CHECK(coeff_str(Coeff::imaginary()) == "I");
  CHECK(coeff_str(Coeff::sqrt2(Rational(1, 2))) == "(1/2)*sqrt(2)");
  Coeff z = Coeff(1) + Coeff::imaginary();
  CHECK(coeff_str(z) == "(1 + I)");
}
