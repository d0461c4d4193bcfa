#include "blowup/universality.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"
#include "blowup/expansion.hpp"

using namespace blowup;

namespace {

// Exact pure-power antiderivative F = u^s (unit amplitude) with f = s u^{s-1}.
Nonlinearity pure_power_F(double s) {
  auto f = [s](double u) { return u > 0.0 ? s * std::pow(u, s - 1.0) : 0.0; };
  auto F = [s](double u) { return u > 0.0 ? std::pow(u, s) : 0.0; };
  return make_from_functions(f, F, 0.0,
                             TailModel::power_law(1.0, s, 1.0, 1e-10),
                             "F=u^s");
}

}  // namespace

TEST_CASE("criterion function matches its closed form for pure powers") {
  // for F = u^s exactly, Phi(u) = u^{2-s/2} / (sqrt(2) (s/2+1) (s-2))
  for (double s : {4.0, 5.0, 6.0}) {
    auto nl = pure_power_F(s);
    PhiEvaluator Phi(nl);
    for (double u : {10.0, 1000.0}) {
      const double expect = std::pow(u, 2.0 - 0.5 * s) /
                            (std::sqrt(2.0) * (0.5 * s + 1.0) * (s - 2.0));
      CHECK(Phi(u) == doctest::Approx(expect).epsilon(1e-6));
    }
  }
}

TEST_CASE("criterion limits for the standard families") {
  // quartic antiderivative tail: positive limit
  auto nl4 = pure_power_F(4.0);
  PhiEvaluator Phi4(nl4);
  CHECK(Phi4(1e5) == doctest::Approx(1.0 / (6.0 * std::sqrt(2.0))).epsilon(1e-6));

  // exponential tail: decay to zero
  auto nle = make_exponential();
  PhiEvaluator Phie(nle);
  CHECK(Phie(40.0) < 1e-6 * Phie(1.0));
}

TEST_CASE("classifier verdicts over the power family and exponential") {
  using C = UniversalityReport::Class;
  CHECK(classify(make_power(2.0)).verdict == C::NonUniversal);
  CHECK(classify(make_power(3.0)).verdict == C::NonUniversal);
  CHECK(classify(make_power(4.0)).verdict == C::Universal);
  CHECK(classify(make_power(5.0)).verdict == C::Universal);
  CHECK(classify(make_exponential()).verdict == C::Universal);
}

TEST_CASE("sampled rule agrees with the closed rule across the boundary") {
  using C = UniversalityReport::Class;
  for (double s : {3.0, 3.9, 4.0, 4.1, 6.0, 10.0}) {
    auto rep = classify(pure_power_F(s));
    CHECK(rep.has_closed_rule);
    CHECK(rep.verdict == (s > 4.0 ? C::Universal : C::NonUniversal));
    CHECK(rep.sampled_verdict == rep.verdict);
    // eventual monotonicity of the samples
    const auto& ph = rep.phi_samples;
    for (size_t i = ph.size() - 4; i + 1 < ph.size(); ++i) {
      if (s > 4.0) CHECK(ph[i + 1] <= ph[i] * (1.0 + 1e-9));
      if (s < 4.0) CHECK(ph[i + 1] >= ph[i] * (1.0 - 1e-9));
    }
  }
}

TEST_CASE("second-term gap approaches the expansion coefficient") {
  std::vector<double> rs;
  for (double d : {1e-2, 1e-3, 1e-4}) rs.push_back(1.0 - d);

  SUBCASE("cubic source: constant second term") {
    auto nl = make_power(3.0);
    auto table = second_term_gap(nl, 3, rs);
    const double a1 = power_law_expansion(3.0, 3, 1).a[1];
    CHECK(table.gap.back() == doctest::Approx(a1).epsilon(0.05));
    // bounded below away from zero at every radius
    for (double g : table.gap) CHECK(g > 0.5 * a1);
  }

  SUBCASE("quintic source: gap decays like sqrt(d)") {
    auto nl = make_power(5.0);
    auto table = second_term_gap(nl, 3, rs);
    const double a1 = power_law_expansion(5.0, 3, 1).a[1];
    for (size_t i = 0; i < rs.size(); ++i) {
      const double d = 1.0 - rs[i];
      CHECK(table.gap[i] == doctest::Approx(a1 * std::sqrt(d)).epsilon(0.1));
      if (i > 0) CHECK(table.gap[i] < table.gap[i - 1]);
    }
  }

  SUBCASE("dimension one: no second term") {
    auto nl = make_power(3.0);
    auto table = second_term_gap(nl, 1, rs);
    for (double g : table.gap) CHECK(std::abs(g) <= 1e-9);
  }

  SUBCASE("bounding quantities bracket the gap") {
    auto nl = make_power(3.0);
    auto table = second_term_gap(nl, 3, rs);
    for (size_t i = 0; i < rs.size(); ++i) {
      // the normalized gap dominates the tail functional asymptotically
      CHECK(table.gap_normalized[i] >=
            0.9 * table.upper_rhs[i]);
      // and the two-point integral respects its elementary bound
      CHECK(table.lower_lhs[i] <= table.lower_rhs[i] * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("direct one-term verification against the shooting oracle") {
  std::vector<double> rs;
  for (double d = 1e-2; d >= 1e-4 / 1.0001; d /= std::sqrt(10.0))
    rs.push_back(1.0 - d);

  SUBCASE("quintic source: the bound controls the gap uniformly") {
    auto nl = make_power(5.0);
    auto sol = solve_large_solution(nl, 3, 1e-8);
    auto table = verify_one_term(nl, sol, rs);
    for (size_t i = 0; i < rs.size(); ++i) {
      CHECK(table.gap[i] >= 0.0);
      CHECK(table.gap[i] <= 10.0 * table.bound[i]);
      if (i > 0) CHECK(table.gap[i] < table.gap[i - 1]);
    }
    // fitted constant stable over the sampled decades
    double cmin = 1e300, cmax = 0.0;
    for (double c : table.fitted_C) {
      cmin = std::min(cmin, c);
      cmax = std::max(cmax, c);
    }
    CHECK(cmax / cmin < 2.0);
  }

  SUBCASE("cubic source: the gap persists") {
    auto nl = make_power(3.0);
    auto sol = solve_large_solution(nl, 3, 1e-8);
    auto table = verify_one_term(nl, sol, rs);
    const double a1 = power_law_expansion(3.0, 3, 1).a[1];
    CHECK(table.gap.back() > 0.5 * a1);
  }

  SUBCASE("dimension one: oracle equals the leading profile") {
    auto nl = make_power(3.0);
    auto sol = solve_large_solution(nl, 1, 1e-10);
    auto table = verify_one_term(nl, sol, rs);
    for (size_t i = 0; i < rs.size(); ++i)
      CHECK(std::abs(table.gap[i]) <= 1e-6 * table.u0[i]);
  }
}

TEST_CASE("exponential sources lose their second term entirely") {
  // universal family: the oracle converges to the leading profile for any N
  auto nl = make_exponential();
  auto sol = solve_large_solution(nl, 3, 1e-8);
  EnergyProfile leading(nl, 0.0);
  double prev = 1e300;
  for (double d : {1e-2, 1e-3, 1e-4}) {
    const double gap = sol.u_at(1.0 - d) - leading.u_at(1.0 - d);
    CHECK(gap >= -1e-9);
    CHECK(gap < prev);
    prev = gap;
  }
  CHECK(prev <= 1e-2);
  // closed form of the leading profile: u0 = 2 log(sqrt(2)/d)
  const double d = 1e-3;
  CHECK(leading.u_at(1.0 - d) ==
        doctest::Approx(2.0 * std::log(std::sqrt(2.0) / d)).epsilon(1e-10));
}

TEST_CASE("numeric-only tails classify through the sampled rule") {
  auto f = [](double u) { return u > 0.0 ? 6.0 * std::pow(u, 5.0) : 0.0; };
  auto F = [](double u) { return u > 0.0 ? std::pow(u, 6.0) : 0.0; };
  auto nl = make_from_functions(f, F, 0.0, TailModel::numeric_only(100.0),
                                "F=u^6-numeric");
  auto rep = classify(nl);
  CHECK_FALSE(rep.has_closed_rule);
  CHECK(rep.verdict == UniversalityReport::Class::Universal);
  CHECK(rep.sampled_verdict == rep.verdict);
}

TEST_CASE("combined report carries verdict and gap samples together") {
  std::vector<double> rs = {1.0 - 1e-2, 1.0 - 1e-3};
  auto rep = universality_report(make_power(3.0), 3, rs);
  CHECK(rep.verdict == UniversalityReport::Class::NonUniversal);
  REQUIRE(rep.gap_r.size() == rs.size());
  for (double g : rep.gap_values) CHECK(g > 0.0);
}

TEST_CASE("classifier verdict matches the measured decay of the gap") {
  using C = UniversalityReport::Class;
  std::vector<double> rs = {1.0 - 1e-2, 1.0 - 1e-6};
  for (double p : {2.0, 3.0, 4.0, 5.0}) {
    auto nl = make_power(p);
    const bool universal = classify(nl).verdict == C::Universal;
    auto sol = solve_large_solution(nl, 3, 1e-8);
    auto table = verify_one_term(nl, sol, rs);
    const bool gap_vanishes = table.gap[1] < 0.1 * table.gap[0];
    CHECK(gap_vanishes == universal);
  }
}
