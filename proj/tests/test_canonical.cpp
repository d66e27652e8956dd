#include <catch2/catch_amalgamated.hpp>

#include "gft/canonical.hpp"
#include "gft/oracle.hpp"
#include "helpers.hpp"

using namespace gft;
using gfttest::ModelFixture;
using gfttest::sq;

namespace {

// Light-cone model: the printed forms of the canonical chain, built
// literally so the engine output has an independent target.
struct CanonicalFixture : ModelFixture {
  Expr u(int dp = 0, int dm = 0) const { return lc_atom("u", dp, dm); }
  Expr thp() const { return lc_atom("theta", 1, 0); }
  Expr thm() const { return lc_atom("theta", 0, 1); }
  Expr pi() const { return lc_atom("Pi"); }

  Expr uum() const { return mul(u(), u(0, 1)); }
  Expr uup() const { return mul(u(), u(1, 0)); }

  // c^2 - 2 th- th+ - sqrt2 c u u- - (sqrt2/c) th-^2 u u+ + (sqrt2/c) th+ th- u u-
  Expr lightcone_bracket() const {
    Expr w = Expr::c_power(4);
    w = sub(w, scale(mul(thm(), thp()), Coeff(2)));
    w = sub(w, scale(uum(), Coeff::sqrt2(), 2));
    w = sub(w, scale(mul(sq(thm()), uup()), Coeff::sqrt2(), -2));
    w = add(w, scale(mul(mul(thp(), thm()), uum()), Coeff::sqrt2(), -2));
    return w;
  }

  Expr lightcone_lagrangian() const {
    return sub(neg(pow_expr(lightcone_bracket(), Rational(1, 2), positive)),
               scale(uum(), Coeff::sqrt2(Rational(1, 2))));
  }

  // Pi = (th- - (1/(sqrt2 c)) th- u u-) / sqrt(bracket)
  Expr momentum_closed_form() const {
    Expr numer = sub(thm(), scale(mul(thm(), uum()), Coeff::sqrt2_power(-1), -2));
    return mul(numer, pow_expr(lightcone_bracket(), Rational(-1, 2), positive));
  }

  // th+ = th-(1 - (sqrt2/c) u u-) / (2((1/(sqrt2 c)) u u- - 1) Pi^2)
  //     + ((sqrt2/c) th-^2 u u+ + sqrt2 c u u- - c^2) / (2 th- ((1/(sqrt2 c)) u u- - 1))
  Expr inversion_closed_form() const {
    Expr dress = sub(scale(uum(), Coeff::sqrt2_power(-1), -2), Expr::one());
    Expr first = mul(mul(thm(), sub(Expr::one(), scale(uum(), Coeff::sqrt2(), -2))),
                     pow_expr(mul(scale(dress, Coeff(2)), sq(pi())), Rational(-1), positive));
    Expr numer2 = add(scale(mul(sq(thm()), uup()), Coeff::sqrt2(), -2),
                      sub(scale(uum(), Coeff::sqrt2(), 2), Expr::c_power(4)));
    Expr second = mul(numer2, pow_expr(mul(scale(thm(), Coeff(2)), dress), Rational(-1), positive));
    return add(first, second);
  }

  // H = (th-/2Pi)(1 - (1/(sqrt2 c)) u u-) + (Pi/2 th-)(c^2 - (1/sqrt2) c u u-
  //     - (sqrt2/c) th-^2 u u+) + (1/sqrt2) u u-
  Expr hamiltonian_closed_form() const {
    Expr h1 = mul(mul(thm(), pow_expr(scale(pi(), Coeff(2)), Rational(-1), positive)),
                  sub(Expr::one(), scale(uum(), Coeff::sqrt2_power(-1), -2)));
    Expr par = sub(sub(Expr::c_power(4), scale(uum(), Coeff::sqrt2_power(-1), 2)),
                   scale(mul(sq(thm()), uup()), Coeff::sqrt2(), -2));
    Expr h2 = mul(mul(pi(), pow_expr(scale(thm(), Coeff(2)), Rational(-1), positive)), par);
    return add(add(h1, h2), scale(uum(), Coeff::sqrt2_power(-1)));
  }

  // L = Pi th+ + (1/(sqrt2 c)) Pi th- u u+ + (Pi c^2/(2 th-) + th-/(2 Pi))
  //     ((1/(sqrt2 c)) u u- - 1) - (1/sqrt2) u u-
  Expr canonical_lagrangian_form() const {
    Expr dress = sub(scale(uum(), Coeff::sqrt2_power(-1), -2), Expr::one());
    Expr paren = add(mul(scale(pi(), Coeff(Rational(1, 2)), 4),
                         pow_expr(thm(), Rational(-1), positive)),
                     mul(scale(thm(), Coeff(Rational(1, 2))),
                         pow_expr(pi(), Rational(-1), positive)));
    Expr L = mul(pi(), thp());
    L = add(L, scale(mul(mul(pi(), thm()), uup()), Coeff::sqrt2_power(-1), -2));
    L = add(L, mul(paren, dress));
    L = sub(L, scale(uum(), Coeff::sqrt2_power(-1)));
    return L;
  }

  // momentum equation: th+ + (1/(sqrt2 c)) th- u u+ + (c^2/(2 th-) - th-/(2 Pi^2)) (dress)
  Expr momentum_equation_form() const {
    Expr dress = sub(scale(uum(), Coeff::sqrt2_power(-1), -2), Expr::one());
    Expr paren = sub(scale(pow_expr(thm(), Rational(-1), positive), Coeff(Rational(1, 2)), 4),
                     mul(scale(thm(), Coeff(Rational(1, 2))),
                         pow_expr(sq(pi()), Rational(-1), positive)));
    return add(add(thp(), scale(mul(thm(), uup()), Coeff::sqrt2_power(-1), -2)),
               mul(paren, dress));
  }

  // conserved flux: (1/(sqrt2 c)) Pi u u+ + (1/(2 Pi) - Pi c^2/(2 th-^2)) (dress)
  Expr conserved_flux_form() const {
    Expr dress = sub(scale(uum(), Coeff::sqrt2_power(-1), -2), Expr::one());
    Expr paren = sub(scale(pow_expr(pi(), Rational(-1), positive), Coeff(Rational(1, 2))),
                     scale(mul(pi(), pow_expr(sq(thm()), Rational(-1), positive)),
                           Coeff(Rational(1, 2)), 4));
    return add(scale(mul(pi(), uup()), Coeff::sqrt2_power(-1), -2), mul(paren, dress));
  }

  CanonicalPair pair() const {
    return CanonicalPair{ctx.atom("theta", kChartLc), ctx.atom("Pi", kChartLc), 0};
  }
};

}  // namespace

TEST_CASE("chart change of the fermionic lagrangian gives the light-cone form") {
  CanonicalFixture f;
  Expr Ltx = f.fermionic_bi_lagrangian();
  Expr Llc = change_chart(Ltx, kChartLc, f.positive);
  CHECK(Llc == f.lightcone_lagrangian());
  // round trip
  CHECK(change_chart(Llc, kChartTx, f.positive) == Ltx);
}

TEST_CASE("canonical momentum reproduces the printed form") {
  CanonicalFixture f;
  Expr pi = canonical_momentum(f.lightcone_lagrangian(), f.pair(), f.positive);
  CHECK(pi == canonicalize(f.momentum_closed_form(), f.positive));

  // bosonic reduction: th- / sqrt(c^2 - 2 th- th+)
  Expr pib = substitute(pi, {{f.ctx.require("u").id, Expr::zero()}}, f.positive);
  Expr wb = sub(Expr::c_power(4), scale(mul(f.thm(), f.thp()), Coeff(2)));
  CHECK(pib == mul(f.thm(), pow_expr(wb, Rational(-1, 2), f.positive)));

  // no dependence on the velocity: zero momentum
  CHECK(canonical_momentum(f.uum(), f.pair(), f.positive).is_zero());
}

TEST_CASE("oracle round-trip establishes the inversion before the symbolic check") {
  CanonicalFixture f;
  Expr pi_closed = canonicalize(f.momentum_closed_form(), f.positive);
  Expr cand = canonicalize(f.inversion_closed_form(), f.positive);
  Atom thp_atom = f.pair().velocity_atom();

  std::set<std::pair<std::string, Atom>> atoms;
  collect_atoms(pi_closed, atoms);
  collect_atoms(cand, atoms);
  atoms.erase({atom_str(thp_atom), thp_atom});

  int done = 0;
  for (uint64_t t = 0; done < 200 && t < 4000; ++t) {
    std::mt19937_64 rng(9000 + t);
    Assignment a = random_assignment(atoms, f.positive, rng);
    try {
      GrassElem cand_val = oracle_eval(cand, a);
      ElementOverrides ov;
      ov.emplace(thp_atom, cand_val);
      GrassElem pi_val = oracle_eval(pi_closed, a, ov);
      GrassElem expect = oracle_eval(Expr::from_atom(f.pair().momentum_field), a);
      REQUIRE((pi_val - expect).is_zero());
      ++done;
    } catch (const EngineError& err) {
      if (err.kind() != ErrorKind::NegativeBase && err.kind() != ErrorKind::ZeroDivision) throw;
    }
  }
  CHECK(done == 200);
}

TEST_CASE("symbolic inversion round trip") {
  CanonicalFixture f;
  Expr pi_closed = canonicalize(f.momentum_closed_form(), f.positive);
  InversionReport rep = verify_inversion(pi_closed, canonicalize(f.inversion_closed_form(), f.positive),
                                         f.pair(), f.positive);
  CHECK(rep.verified);
  CHECK(rep.residual.is_zero());

  // engine momentum instead of the printed one: same result
  Expr pi_engine = canonical_momentum(f.lightcone_lagrangian(), f.pair(), f.positive);
  CHECK(verify_inversion(pi_engine, f.inversion_closed_form(), f.pair(), f.positive).verified);

  // perturbed candidate fails
  Expr bad = add(f.inversion_closed_form(), f.thm());
  CHECK_FALSE(verify_inversion(pi_closed, bad, f.pair(), f.positive).verified);
}

TEST_CASE("bosonic inversion round trip") {
  CanonicalFixture f;
  auto drop_u = [&](const Expr& e) {
    return substitute(e, {{f.ctx.require("u").id, Expr::zero()}}, f.positive);
  };
  Expr pib = drop_u(canonicalize(f.momentum_closed_form(), f.positive));
  Expr candb = drop_u(canonicalize(f.inversion_closed_form(), f.positive));
  // frozen bosonic candidate: c^2/(2 th-) - th-/(2 Pi^2)
  Expr frozen = sub(scale(pow_expr(f.thm(), Rational(-1), f.positive), Coeff(Rational(1, 2)), 4),
                    mul(scale(f.thm(), Coeff(Rational(1, 2))),
                        pow_expr(sq(f.pi()), Rational(-1), f.positive)));
  CHECK(candb == frozen);
  CHECK(verify_inversion(pib, candb, f.pair(), f.positive).verified);
}

TEST_CASE("generic solver recovers the closed-form inversion from its body") {
  CanonicalFixture f;
  Expr pi_closed = canonicalize(f.momentum_closed_form(), f.positive);
  Expr cand = canonicalize(f.inversion_closed_form(), f.positive);
  // body-level branch: the u -> 0 reduction of the closed form
  Expr body = substitute(cand, {{f.ctx.require("u").id, Expr::zero()}}, f.positive);
  Expr solved = solve_inversion(pi_closed, f.pair(), body, f.positive);
  CHECK(solved == cand);
  CHECK(verify_inversion(pi_closed, solved, f.pair(), f.positive).verified);
}

TEST_CASE("legendre transform reproduces the printed hamiltonian") {
  CanonicalFixture f;
  Expr H = legendre(f.lightcone_lagrangian(), f.pair(), canonicalize(f.inversion_closed_form(), f.positive),
                    f.positive);
  CHECK(H == canonicalize(f.hamiltonian_closed_form(), f.positive));

  // bosonic reduction: th-/(2 Pi) + Pi c^2/(2 th-)
  Expr Hb = substitute(H, {{f.ctx.require("u").id, Expr::zero()}}, f.positive);
  Expr want = add(mul(scale(f.thm(), Coeff(Rational(1, 2))),
                      pow_expr(f.pi(), Rational(-1), f.positive)),
                  mul(scale(f.pi(), Coeff(Rational(1, 2)), 4),
                      pow_expr(f.thm(), Rational(-1), f.positive)));
  CHECK(Hb == want);

  // at most bilinear in odd atoms
  CHECK(H.max_odd_degree() <= 2);
}

TEST_CASE("reconstructed canonical lagrangian matches the printed form") {
  CanonicalFixture f;
  Expr H = legendre(f.lightcone_lagrangian(), f.pair(), canonicalize(f.inversion_closed_form(), f.positive),
                    f.positive);
  Expr Lcan = sub(mul(Expr::from_atom(f.pair().momentum_field),
                     Expr::from_atom(f.pair().velocity_atom())),
                 H);
  CHECK(Lcan == canonicalize(f.canonical_lagrangian_form(), f.positive));
  CHECK(Lcan.max_odd_degree() <= 2);
}

TEST_CASE("equations of motion match the printed pair") {
  CanonicalFixture f;
  Expr Lcan = canonicalize(f.canonical_lagrangian_form(), f.positive);
  auto [eom_pi, eom_theta] = derive_eom(Lcan, f.pair(), f.positive);

  // the momentum equation is dL/dPi = 0, purely algebraic
  CHECK(eom_pi == canonicalize(f.momentum_equation_form(), f.positive));

  // the field equation is d+ Pi + d-(flux) = 0; the EL operator returns its negative
  Expr pi_plus = Expr::from_atom(f.ctx.atom("Pi", kChartLc, 1, 0));
  Expr printed = add(pi_plus, coord_derive(canonicalize(f.conserved_flux_form(), f.positive), kChartLc, 1));
  CHECK(add(eom_theta, printed).is_zero());

  // flux J = dL/d theta_-
  Expr J = partial_atom(Lcan, f.ctx.atom("theta", kChartLc, 0, 1), f.positive);
  CHECK(J == canonicalize(f.conserved_flux_form(), f.positive));

  // bosonic reduction of the field equation
  Expr eom_b = substitute(eom_theta, {{f.ctx.require("u").id, Expr::zero()}}, f.positive);
  Expr flux_b = substitute(J, {{f.ctx.require("u").id, Expr::zero()}}, f.positive);
  CHECK(add(eom_b, add(pi_plus, coord_derive(flux_b, kChartLc, 1))).is_zero());
}

TEST_CASE("consistency triangle cross-checked by the oracle") {
  CanonicalFixture f;
  Expr Llc = f.lightcone_lagrangian();
  Expr pi_engine = canonical_momentum(Llc, f.pair(), f.positive);
  Expr pi_printed = canonicalize(f.momentum_closed_form(), f.positive);
  OracleReport rep = oracle_equiv(pi_engine, pi_printed, 60, 31, f.positive);
  CHECK(rep.equivalent);

  Expr H = legendre(Llc, f.pair(), canonicalize(f.inversion_closed_form(), f.positive), f.positive);
  OracleReport rep2 = oracle_equiv(H, canonicalize(f.hamiltonian_closed_form(), f.positive), 60, 32,
                                   f.positive);
  CHECK(rep2.equivalent);
}
