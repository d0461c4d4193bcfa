#include "blowup/expansion.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "blowup/picard.hpp"

using namespace blowup;

namespace {

// Independent oracle machinery: substitute a truncated boundary expansion
// into the radial equation written in d = 1 - r and inspect the residual.
double expansion_residual(const std::vector<double>& a, double m, double p,
                          int N, double d) {
  double u = 0, ud = 0, udd = 0;
  for (size_t k = 0; k < a.size(); ++k) {
    const double e = static_cast<double>(k) - m;
    u += a[k] * std::pow(d, e);
    ud += a[k] * e * std::pow(d, e - 1);
    udd += a[k] * e * (e - 1) * std::pow(d, e - 2);
  }
  return udd - (N - 1) / (1.0 - d) * ud - std::pow(u, p);
}

// Fits the second coefficient by zeroing the leading residual order, using
// only the closed-form a0 and the differential equation.
double fit_second_coefficient(double p, int N) {
  const double m = 2.0 / (p - 1.0);
  const double a0 = std::pow(2.0 * (p + 1.0) / ((p - 1.0) * (p - 1.0)),
                             1.0 / (p - 1.0));
  auto leading = [&](double a1) {
    auto c = [&](double d) {
      return expansion_residual({a0, a1}, m, p, N, d) * std::pow(d, m + 1.0);
    };
    const double d0 = 1e-4;
    return 2.0 * c(d0 / 2.0) - c(d0);  // second-order extrapolation in d
  };
  // the matching order is linear in a1, so one secant step lands on the root
  const double f0 = leading(0.0);
  const double f1 = leading(1.0);
  return -f0 / (f1 - f0);
}

}  // namespace

TEST_CASE("leading coefficient matches its closed form to twelve digits") {
  for (double p : {1.5, 2.0, 3.0, 5.0, 9.0}) {
    auto e = power_law_expansion(p, 3, 0);
    const double a0 = std::pow(2.0 * (p + 1.0) / ((p - 1.0) * (p - 1.0)),
                               1.0 / (p - 1.0));
    CHECK(std::abs(e.a[0] / a0 - 1.0) <= 1e-12);
  }
}

TEST_CASE("second coefficient agrees with the undetermined-coefficient fit") {
  for (double p : {2.0, 3.0, 5.0}) {
    for (int N : {1, 2, 3}) {
      auto e = power_law_expansion(p, N, 1);
      const double fitted = fit_second_coefficient(p, N);
      CHECK(e.a[1] == doctest::Approx(fitted).epsilon(1e-6).scale(1.0));
    }
  }
  // the dimension-three quadratic case in numbers
  auto e = power_law_expansion(2.0, 3, 1);
  CHECK(e.a[1] == doctest::Approx(2.4).epsilon(1e-12));
}

TEST_CASE("substituting the truncation back leaves a residual of higher order") {
  struct Case {
    double p;
    int N, order;
  };
  for (const Case& c : {Case{1.5, 3, 3}, Case{2.0, 3, 4}, Case{2.0, 5, 2},
                        Case{3.0, 2, 2}, Case{5.0, 3, 1}, Case{9.0, 3, 1}}) {
    auto e = power_law_expansion(c.p, c.N, c.order);
    const double e_last = e.exponents.back();
    const double r1 = expansion_residual(e.a, e.m, c.p, c.N, 1e-2);
    const double r2 = expansion_residual(e.a, e.m, c.p, c.N, 1e-3);
    // guard for exactly solved truncations, where only rounding remains
    const double scale = std::pow(e.a[0] * std::pow(1e-3, -e.m), c.p);
    if (std::abs(r2) <= 1e-10 * scale) continue;
    const double slope = std::log(std::abs(r2 / r1)) / std::log(1e-1);
    CHECK(slope > e_last - 2.0 + 0.5);
  }

  // flat solutions solve the equation exactly at every order
  for (double p : {2.0, 3.0, 5.0}) {
    auto e = power_law_expansion(p, 1, 2);
    const double scale = std::pow(e.a[0] * std::pow(1e-3, -e.m), p);
    CHECK(std::abs(expansion_residual(e.a, e.m, p, 1, 1e-3)) <= 1e-10 * scale);
  }
}

TEST_CASE("singular term count follows the floor rule") {
  CHECK(singular_term_count(2.0) == 3);
  CHECK(singular_term_count(3.0) == 2);
  CHECK(singular_term_count(100.0) == 1);
  CHECK(singular_term_count(5.0) == 1);

  std::mt19937 rng(20240817);
  std::uniform_real_distribution<double> pr(1.02, 12.0);
  for (int i = 0; i < 20; ++i) {
    const double p = pr(rng);
    const double m = 2.0 / (p - 1.0);
    CHECK(singular_term_count(p) == static_cast<int>(std::floor(m)) + 1);
  }
  CHECK_THROWS_AS(singular_term_count(1.0), std::invalid_argument);
}

TEST_CASE("integer lattices are flagged as resonant and capped") {
  CHECK(power_law_expansion(2.0, 3, 2).resonant_lattice);
  CHECK(power_law_expansion(3.0, 3, 1).resonant_lattice);
  CHECK_FALSE(power_law_expansion(2.5, 3, 1).resonant_lattice);

  auto deep = power_law_expansion(2.0, 3, 50);
  CHECK(deep.requested_order == 50);
  CHECK(deep.computed_order == 4);  // strictly below the resonant slot
  CHECK(static_cast<int>(deep.a.size()) == deep.computed_order + 1);

  // coefficients beyond the singular set carry positive exponents
  for (size_t k = 0; k < deep.exponents.size(); ++k) {
    if (static_cast<int>(k) > deep.K) CHECK(deep.exponents[k] > 0.0);
  }
}

TEST_CASE("three-term boundary functionals for the quadratic source") {
  auto nl = make_power(2.0);
  const int N = 3;
  auto ws = make_workspace(nl, N, {});
  auto v0 = make_v0(ws);
  auto v2 = apply_N(apply_N(v0));

  std::vector<double> ds = {1e-2, 1e-3, 1e-4};
  std::vector<double> u2s;
  for (double d : ds) u2s.push_back(invert_uk(v2, 1.0 - d));
  std::vector<double> grid;
  for (double u = u2s.front() * 0.5; u <= u2s.back() * 2.0; u *= 2.0)
    grid.push_back(u);
  grid.push_back(u2s.back() * 2.0);
  auto table = three_term_table(nl, N, grid);

  SUBCASE("closed form of the distance functional") {
    CHECK(table.R0_fn(1e6) ==
          doctest::Approx(std::sqrt(6.0 / 1e6)).epsilon(1e-8));
  }

  SUBCASE("all three positive and decreasing on the sampled range") {
    for (size_t i = 0; i < table.U.size(); ++i) {
      CHECK(table.R0[i] > 0.0);
      CHECK(table.R1[i] > 0.0);
      CHECK(table.R2[i] > 0.0);
      if (i > 0) {
        CHECK(table.R0[i] < table.R0[i - 1]);
        CHECK(table.R1[i] < table.R1[i - 1]);
        CHECK(table.R2[i] < table.R2[i - 1]);
      }
    }
  }

  SUBCASE("the residual of the implicit relation is the third functional") {
    double prev = 1e300;
    for (size_t i = 0; i < ds.size(); ++i) {
      const double d = ds[i];
      const double u2 = u2s[i];
      const double ratio =
          (d - table.R0_fn(u2) - table.R1_fn(u2)) / table.R2_fn(u2);
      CHECK(ratio > 0.5);
      CHECK(ratio < 1.5);
      CHECK(std::abs(ratio - 1.0) < std::abs(prev - 1.0));
      prev = ratio;
    }
  }

  SUBCASE("inverting the relation reproduces the second iterate") {
    double prev_gap = 1.0;
    for (size_t i = 0; i < ds.size(); ++i) {
      const double U = invert_three_term(table, 1.0 - ds[i]);
      const double gap = std::abs(U / u2s[i] - 1.0);
      CHECK(gap < prev_gap);
      prev_gap = gap;
    }
    CHECK(prev_gap < 1e-10);
    CHECK_THROWS_AS(invert_three_term(table, 0.5), std::out_of_range);
  }

  SUBCASE("shifting the inner lower limit perturbs only higher order") {
    auto shifted = three_term_table(nl, N, grid, 1.0);
    const double U = u2s[1];
    // identical leading functional, nearby corrections
    CHECK(shifted.R0_fn(U) == doctest::Approx(table.R0_fn(U)).epsilon(1e-10));
    CHECK(shifted.R1_fn(U) == doctest::Approx(table.R1_fn(U)).epsilon(1e-3));
    const double ratio =
        (ds[1] - shifted.R0_fn(U) - shifted.R1_fn(U)) / shifted.R2_fn(U);
    CHECK(ratio == doctest::Approx(1.0).epsilon(0.05));
  }
}

TEST_CASE("one-dimensional tables carry no correction terms") {
  auto nl = make_power(2.0);
  std::vector<double> grid = {1e4, 1e5, 1e6};
  auto table = three_term_table(nl, 1, grid);
  for (size_t i = 0; i < table.U.size(); ++i) {
    CHECK(table.R1[i] == 0.0);
    CHECK(table.R2[i] == 0.0);
  }
  // with only the distance functional, inversion is the exact profile
  const double d = table.R0_fn(2e4);
  CHECK(invert_three_term(table, 1.0 - d) == doctest::Approx(2e4).epsilon(1e-9));
}
