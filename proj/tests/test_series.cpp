#include "blowup/series.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"

using namespace blowup;

namespace {
PuiseuxSeries make(double alpha, double delta, std::vector<double> c,
                   double order) {
  return PuiseuxSeries(alpha, delta, std::move(c), order, "x");
}
}  // namespace

TEST_CASE("reciprocal of 1 + x is the alternating geometric series") {
  auto s = make(0.0, 1.0, {1.0, 1.0}, 6.0);
  auto r = series_recip(s);
  REQUIRE(r.terms() >= 6);
  for (size_t k = 0; k < 6; ++k)
    CHECK(r.coeffs()[k] == doctest::Approx((k % 2) ? -1.0 : 1.0).epsilon(1e-14));
}

TEST_CASE("square root of 1 + 2x starts 1, 1, -1/2") {
  auto s = make(0.0, 1.0, {1.0, 2.0}, 5.0);
  auto r = series_sqrt(s);
  REQUIRE(r.terms() >= 3);
  CHECK(r.coeffs()[0] == doctest::Approx(1.0));
  CHECK(r.coeffs()[1] == doctest::Approx(1.0));
  CHECK(r.coeffs()[2] == doctest::Approx(-0.5));
}

TEST_CASE("tail integration of x^-2 gives x^-1") {
  // in x = 1/t the term x^2 stands for t^-2; integrating the t-tail
  auto s = make(2.0, 1.0, {1.0}, 2.0);
  auto r = series_integrate_tail(s);
  REQUIRE(r.terms() == 1);
  CHECK(r.alpha() == doctest::Approx(1.0));
  CHECK(r.coeffs()[0] == doctest::Approx(1.0));

  auto harmonic = make(1.0, 1.0, {1.0}, 1.0);
  CHECK_THROWS_AS(series_integrate_tail(harmonic), std::domain_error);
}

TEST_CASE("antiderivative reports the resonant slot") {
  auto s = make(1.0, 0.5, {1.0}, 2.0);  // t^-1 term
  CHECK_THROWS_AS(series_antiderivative(s), std::domain_error);

  auto ok = make(-1.5, 0.5, {2.0}, -1.0);  // 2 t^{3/2} -> (4/5) t^{5/2}
  auto r = series_antiderivative(ok);
  CHECK(r.alpha() == doctest::Approx(-2.5));
  CHECK(r.coeffs()[0] == doctest::Approx(0.8));
}

TEST_CASE("product with reciprocal returns to one within stored order") {
  std::mt19937 rng(4242);
  std::uniform_real_distribution<double> cr(-2.0, 2.0);
  std::uniform_int_distribution<int> nd(2, 7);
  std::uniform_int_distribution<int> di(1, 4);
  std::uniform_real_distribution<double> ar(-3.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = nd(rng);
    const double delta = 0.25 * di(rng);
    const double alpha = ar(rng);
    std::vector<double> c(n);
    c[0] = (cr(rng) > 0 ? 1.0 : -1.0) * (0.5 + std::abs(cr(rng)));
    for (int i = 1; i < n; ++i) c[i] = cr(rng);
    auto s = PuiseuxSeries(alpha, delta, c, alpha + (n - 1) * delta, "x");
    auto prod = series_mul(s, series_recip(s));
    // all coefficients within the stored order: 1 at exponent 0, 0 elsewhere
    for (size_t k = 0; k < prod.terms(); ++k) {
      const double expect = std::abs(prod.exponent(k)) < 1e-12 ? 1.0 : 0.0;
      CHECK(prod.coeffs()[k] == doctest::Approx(expect).epsilon(1e-10).scale(1.0));
    }
  }
}

TEST_CASE("composition with a shifted argument matches direct evaluation") {
  // s(x) = x^-2 + 3 x^-1, g(x) = 0.01 x: s(x(1+g)) evaluated numerically
  auto s = make(-2.0, 1.0, {1.0, 3.0}, 3.0);
  auto g = make(1.0, 1.0, {0.01}, 5.0);
  auto composed = series_compose_shift(s, g);
  for (double x : {0.05, 0.1, 0.2}) {
    const double direct = 1.0 / std::pow(x * (1 + 0.01 * x), 2) +
                          3.0 / (x * (1 + 0.01 * x));
    CHECK(composed.eval(x) == doctest::Approx(direct).epsilon(1e-8));
  }
}

TEST_CASE("series evaluation sums the stored terms") {
  auto s = make(-0.5, 0.5, {2.0, 1.0, -0.25}, 1.0);
  const double x = 0.3;
  const double expect = 2.0 * std::pow(x, -0.5) + 1.0 - 0.25 * std::pow(x, 0.5);
  CHECK(s.eval(x) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("lattice misalignment is rejected") {
  auto a = make(0.0, 1.0, {1.0}, 3.0);
  auto b = make(0.5, 1.0, {1.0}, 3.0);
  CHECK_THROWS_AS(series_add(a, b), std::invalid_argument);
  auto c = make(0.0, 0.75, {1.0}, 3.0);
  CHECK_THROWS_AS(series_add(a, c), std::invalid_argument);
}
