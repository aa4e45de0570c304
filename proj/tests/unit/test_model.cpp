#include <doctest.h>

#include <cmath>
#include <random>

#include "sdosc/error.hpp"
#include "sdosc/model.hpp"

using namespace sdosc;

namespace {
Params P(double l, double alpha, double beta, double c = 1.0, double d = 1.0) {
  return {l, alpha, beta, c, d};
}
}  // namespace

TEST_CASE("params validation and predicates") {
  CHECK_NOTHROW(P(0, 1, 1).validate());
  CHECK_THROWS_AS(P(-0.1, 1, 1).validate(), ValidationError);
  CHECK_THROWS_AS(P(0, 0, 1).validate(), ValidationError);
  CHECK_THROWS_AS(P(0, 1, -1).validate(), ValidationError);
  CHECK_THROWS_AS(P(0, 1, 1, 0).validate(), ValidationError);
  CHECK_THROWS_AS(P(0, 1, 1, 1, NAN).validate(), ValidationError);
  CHECK(P(1, 1, 1).well_posed());
  CHECK_FALSE(P(1, 0.5, 2).well_posed());
  CHECK_FALSE(P(1, 1, 1).strict_gap());
  CHECK(P(1, 1.2, 3).strict_gap());
}

TEST_CASE("alpha_star values") {
  CHECK(alpha_star(P(0, 1, 1)) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(alpha_star(P(1, 1, 1)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(alpha_star(P(1, 1.2, 3)) == doctest::Approx(1.4).epsilon(1e-15));
  for (double l : {0.0, 0.5, 2.0, 7.0}) CHECK(alpha_star(P(l, 1, l)) == doctest::Approx(l));
}

TEST_CASE("alpha_star bounds hold on random parameters") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const Params p = P(U(rng), 1.0, 0.01 + U(rng));
    const double a = alpha_star(p);
    CHECK(a < p.l + 1.0);
    CHECK((a >= p.l) == (p.beta >= p.l));
    if (p.l == 0.0) CHECK(a == doctest::Approx(p.beta / (p.beta + 2)));
  }
  CHECK(alpha_star(P(0, 1, 2)) == doctest::Approx(0.5));
}

TEST_CASE("critical_c0 values") {
  CHECK(critical_c0(P(0, 1.0 / 3, 1)) == doctest::Approx(3.0 * std::pow(0.75, 2.0 / 3)).epsilon(1e-14));
  CHECK(critical_c0(P(0, 1.0 / 3, 1)) == doctest::Approx(2.4764).epsilon(1e-4));
  CHECK(critical_c0(P(0, 0.5, 2)) == doctest::Approx(4.0 * std::pow(2.0 / 3, 0.75)).epsilon(1e-14));
  CHECK(critical_c0(P(0, 0.5, 2)) == doctest::Approx(2.9511).epsilon(1e-4));
  // c0 scales as d^(1/(beta+2)): the substitution u -> d^(-1/beta) u leaves the
  // stiffness at 1 while the time scale picks up exactly this power.
  for (double l : {0.0, 1.0, 2.5})
    for (double beta : {0.5, 1.0, 4.0})
      for (double d : {0.3, 2.0, 8.0}) {
        const double ratio = critical_c0(P(l, 1, beta, 1, d)) / critical_c0(P(l, 1, beta, 1, 1));
        CHECK(ratio == doctest::Approx(std::pow(d, 1.0 / (beta + 2))).epsilon(1e-13));
      }
}

TEST_CASE("classify_theoretical examples") {
  CHECK(classify_theoretical(P(0, 1, 1)) == Regime::Oscillatory);
  CHECK(classify_theoretical(P(1, 1.2, 3)) == Regime::NonOscillatoryFiniteZeros);
  CHECK(classify_theoretical(P(0, 1.0 / 3, 1, 3)) == Regime::CriticalAtMostOneZero);
  CHECK(classify_theoretical(P(0, 1.0 / 3, 1, 1)) == Regime::Oscillatory);
  CHECK(classify_theoretical(P(1, 1, 1)) == Regime::OutsideTheory);    // alpha = l
  CHECK(classify_theoretical(P(2, 3, 1)) == Regime::OutsideTheory);    // l > beta
  // Equality with c0 counts as critical.
  const Params at_c0 = P(0, 1.0 / 3, 1, critical_c0(P(0, 1.0 / 3, 1)));
  CHECK(classify_theoretical(at_c0) == Regime::CriticalAtMostOneZero);
}

TEST_CASE("classify_theoretical is total on random parameters") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.01, 4.0);
  for (int i = 0; i < 2000; ++i) {
    const Params p = P(U(rng) - 0.01, U(rng), U(rng), U(rng), U(rng));
    const Regime r = classify_theoretical(p);
    const bool in_theory = p.l < p.alpha && p.l <= p.beta;
    CHECK((r == Regime::OutsideTheory) == !in_theory);
    CHECK(parse_regime(to_string(r)) == r);
  }
}

TEST_CASE("energy values and symmetry") {
  CHECK(energy(P(0, 1, 2), 0, 0) == 0.0);
  CHECK(energy(P(0, 1, 2), 1, 1) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(energy(P(1, 1, 1), 0, 1) == doctest::Approx(2.0 / 3).epsilon(1e-15));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int i = 0; i < 500; ++i) {
    const Params p = P(std::fabs(U(rng)), 1, 0.1 + std::fabs(U(rng)), 1, 0.1 + std::fabs(U(rng)));
    const double u = U(rng), du = U(rng);
    CHECK(energy(p, u, du) == energy(p, -u, -du));
    CHECK(energy(p, u, du) > 0.0);
  }
}

TEST_CASE("asymptotic constants") {
  const AsymptoticConstants k = asymptotic_constants(P(0, 0.5, 3));
  CHECK(k.k_du == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(k.k_u == doctest::Approx(4.0).epsilon(1e-14));
  const Params base = P(0.5, 0.9, 4);
  REQUIRE(base.alpha < alpha_star(base));
  for (int kk = -3; kk <= 3; ++kk) {
    Params scaled = base;
    scaled.c = std::ldexp(1.0, kk);
    const double expected =
        std::pow(2.0, -kk / (base.alpha - base.l)) * asymptotic_constants(base).k_du;
    CHECK(asymptotic_constants(scaled).k_du == doctest::Approx(expected).epsilon(1e-13));
  }
  CHECK_THROWS_AS(asymptotic_constants(P(0, 1, 1)), DomainError);  // alpha > alpha*
  CHECK_THROWS_AS(asymptotic_constants(P(1, 1, 3)), DomainError);  // alpha = l
}

TEST_CASE("comparison bound") {
  const Params p = P(0, 0.5, 2);
  CHECK(comparison_bound(p, 1.0) == doctest::Approx(16.0).epsilon(1e-14));
  CHECK(comparison_bound(p, 4.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(comparison_cap(p) == comparison_bound(p, 1.0));
  double prev = comparison_bound(p, 1.0);
  for (double t = 1.5; t < 1e4; t *= 1.5) {
    const double w = comparison_bound(p, t);
    CHECK(w < prev);
    prev = w;
  }
  CHECK_THROWS_AS(comparison_bound(P(1, 1, 1), 2.0), DomainError);
}

TEST_CASE("energy exponents") {
  CHECK(fast_energy_exponent(P(0, 1, 1)) == doctest::Approx(-2.0));
  CHECK(slow_energy_exponent(P(1, 1.2, 3)) == doctest::Approx(-2.2 * 5 / 1.8));
  CHECK(fast_energy_exponent(P(1, 1.2, 3)) == doctest::Approx(-15.0));
}
