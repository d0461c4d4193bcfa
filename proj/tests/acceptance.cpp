// Acceptance runner: exercises every top-level claim the library makes, one
// criterion per section, and prints one PASS/FAIL line each. Exits nonzero
// if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "blowup/expansion.hpp"
#include "blowup/nonlinearity.hpp"
#include "blowup/phase_plane.hpp"
#include "blowup/picard.hpp"
#include "blowup/universality.hpp"

using namespace blowup;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

struct Timer {
  Clock::time_point t0 = Clock::now();
  double seconds() const {
    return std::chrono::duration<double>(Clock::now() - t0).count();
  }
};

void report(int id, bool ok, const std::string& what, double secs) {
  std::printf("[%s] criterion %2d: %s (%.2f s)\n", ok ? "PASS" : "FAIL", id,
              what.c_str(), secs);
  if (!ok) ++g_failures;
}

std::string fmt(double x) {
  char b[64];
  std::snprintf(b, sizeof b, "%.6g", x);
  return b;
}

// shared expensive artifacts
std::map<std::pair<double, int>, RadialSolution> g_solutions;
const RadialSolution& oracle(double p, int N) {
  auto key = std::make_pair(p, N);
  auto it = g_solutions.find(key);
  if (it == g_solutions.end())
    it = g_solutions.emplace(key, solve_large_solution(make_power(p), N, 1e-8))
             .first;
  return it->second;
}

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

void criterion_1() {
  Timer t;
  bool ok = true;
  std::string detail;
  try {
    auto nl = make_power(3.0);
    auto res = fixed_point(nl, 1);
    ok &= res.converged_at == 1;
    ok &= res.history[1].sup_gap(res.history[0]) < 1e-10;
    ok &= res.residual < 1e-10;

    EnergyProfile ref(nl, 0.0);
    std::vector<double> rs = {1.0 - 1e-2, 1.0 - 1e-3, 1.0 - 1e-4};
    auto gaps = asymptotic_gap(res, 0, [&](double r) { return ref.u_at(r); },
                               rs);
    double worst = 0.0;
    for (double g : gaps.ratio_oracle) worst = std::max(worst, std::abs(g));
    ok &= worst <= 1e-8;

    std::vector<double> grid = {1e2, 1e4, 1e6};
    auto table = three_term_table(nl, 1, grid);
    for (size_t i = 0; i < grid.size(); ++i)
      ok &= table.R1[i] == 0.0 && table.R2[i] == 0.0;

    detail = "flat degeneracy: converged_at=" + std::to_string(res.converged_at) +
             " gap_ratio=" + fmt(worst) + " R1=R2=0";
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string("exception: ") + e.what();
  }
  const double secs = t.seconds();
  ok &= secs < 1.0;
  report(1, ok, detail + ", budget 1 s", secs);
}

void criterion_2() {
  for (int N : {1, 3}) {
    Timer t;
    bool ok = true;
    std::string detail;
    try {
      const auto& sol = oracle(2.0, N);
      const double d = 1e-4;
      const double val = sol.u_at(1.0 - d) * d * d;
      ok = std::abs(val - 6.0) <= 1e-2;
      detail = "leading constant N=" + std::to_string(N) +
               ": u(r)(1-r)^2=" + fmt(val);
    } catch (const std::exception& e) {
      ok = false;
      detail = std::string("exception: ") + e.what();
    }
    const double secs = t.seconds();
    ok &= secs < 10.0;
    report(2, ok, detail + ", budget 10 s", secs);
  }
}

void criterion_3() {
  Timer t;
  bool ok = true;
  std::string detail;
  try {
    const auto& sol = oracle(2.0, 3);
    const double d = 1e-4;
    const double second = (sol.u_at(1.0 - d) - 6.0 / (d * d)) * d;
    ok = std::abs(second - 2.4) <= 0.05 * 2.4;
    detail = "second coefficient via oracle: (u - 6/d^2) d = " + fmt(second) +
             " vs 2.4";
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string("exception: ") + e.what();
  }
  report(3, ok, detail, t.seconds());
}

void criterion_4() {
  Timer t;
  bool ok = true;
  std::string detail = "verdicts:";
  using C = UniversalityReport::Class;
  try {
    const C expect[] = {C::NonUniversal, C::NonUniversal, C::Universal,
                        C::Universal};
    const double ps[] = {2.0, 3.0, 4.0, 5.0};
    for (int i = 0; i < 4; ++i) {
      auto rep = classify(make_power(ps[i]));
      ok &= rep.verdict == expect[i];
      ok &= rep.sampled_verdict == rep.verdict;
      // closed rule: universal iff the antiderivative exponent exceeds 4
      ok &= (rep.verdict == C::Universal) == (ps[i] + 1.0 > 4.0);
      detail += std::string(" p") + fmt(ps[i]) + "=" + to_string(rep.verdict);
    }
    auto er = classify(make_exponential());
    ok &= er.verdict == C::Universal && er.sampled_verdict == C::Universal;
    detail += std::string(" exp=") + to_string(er.verdict);
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string("exception: ") + e.what();
  }
  const double secs = t.seconds();
  ok &= secs < 30.0;
  report(4, ok, detail + ", budget 30 s", secs);
}

void criterion_5() {
  Timer t;
  bool ok = true;
  std::string detail;
  try {
    std::vector<double> rs;
    for (double d = 1e-2; d >= 1e-4 / 1.0001; d /= std::sqrt(10.0))
      rs.push_back(1.0 - d);

    auto nl5 = make_power(5.0);
    auto table5 = verify_one_term(nl5, oracle(5.0, 3), rs);
    double worst_ratio = 0.0;
    for (size_t i = 0; i < rs.size(); ++i) {
      worst_ratio = std::max(worst_ratio, table5.gap[i] / table5.bound[i]);
      ok &= table5.gap[i] <= 10.0 * table5.bound[i];
      if (i > 0) ok &= table5.gap[i] < table5.gap[i - 1];
    }

    auto nl3 = make_power(3.0);
    auto table3 = verify_one_term(nl3, oracle(3.0, 3), rs);
    const double a1 = power_law_expansion(3.0, 3, 1).a[1];
    ok &= table3.gap.back() > 0.5 * a1;

    detail = "one-term rate: p=5 gap/bound<=" + fmt(worst_ratio) +
             " decreasing; p=3 residual gap " + fmt(table3.gap.back()) +
             " > " + fmt(0.5 * a1);
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string("exception: ") + e.what();
  }
  report(5, ok, detail, t.seconds());
}

void criterion_6() {
  Timer t;
  bool ok = true;
  std::string detail = "energy-error limits:";
  try {
    for (double p : {2.0, 3.0}) {
      auto nl = make_power(p);
      auto G = antiderivative_G(nl);
      for (int N : {2, 3}) {
        const auto& sol = oracle(p, N);
        const double u_top = sol.path.u_max();
        const double g_top = sol.path.g_at(u_top);
        const double r1 = g_top / ((N - 1) * G(u_top));
        const double r2 = g_top / nl.F(u_top);
        ok &= std::abs(r1 - 1.0) <= 1e-2;
        ok &= r2 <= 1e-2;
        detail += " (p=" + fmt(p) + ",N=" + std::to_string(N) + "): " +
                  fmt(r1);
      }
    }
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string("exception: ") + e.what();
  }
  report(6, ok, detail, t.seconds());
}

void criterion_7() {
  Timer t;
  bool ok = true;
  std::string detail;
  try {
    auto nl = make_power(3.0);
    EnergyProfile p0(nl, 0.0), p1(nl, 1.0);
    std::vector<double> rs;
    for (double d = 1e-2; d >= 1e-4 / 1.0001; d /= 2.0) rs.push_back(1.0 - d);
    auto rep = pair_gap_estimates(nl, p0, p1, rs);

    double fmax = 0.0, cmin = 1e300, cmax = 0.0;
    for (size_t i = 0; i < rs.size(); ++i) {
      fmax = std::max(fmax, rep.f_gap[i]);
      cmin = std::min(cmin, rep.fitted_C[i]);
      cmax = std::max(cmax, rep.fitted_C[i]);
    }
    ok &= fmax <= 1.0 + 0.05;
    ok &= (cmax - cmin) / cmax < 0.2;
    detail = "pair bounds: max |F(u1)-F(u2)| = " + fmt(fmax) +
             ", fitted C in [" + fmt(cmin) + ", " + fmt(cmax) + "]";
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string("exception: ") + e.what();
  }
  report(7, ok, detail, t.seconds());
}

void criterion_8() {
  Timer t;
  bool ok = true;
  std::string detail;
  try {
    auto nl = make_power(3.0);
    auto res = fixed_point(nl, 3);
    const auto& sol = oracle(3.0, 3);
    auto g = error_term(sol);
    double worst = 0.0;
    for (double u = 10.0 * res.ws->U0; u <= 0.999 * res.ws->Umax; u *= 1.1) {
      if (u < sol.path.u_min() || u > sol.path.u_max()) continue;
      const double v_orc = std::sqrt(2.0 * (nl.F(u) - g(u)));
      worst = std::max(worst, std::abs(res.fixed().v_at(u) / v_orc - 1.0));
    }
    ok = worst <= 1e-4;
    detail = "fixed point vs oracle: sup |v/v_oracle - 1| = " + fmt(worst);
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string("exception: ") + e.what();
  }
  report(8, ok, detail, t.seconds());
}

void criterion_9() {
  Timer t;
  bool ok = true;
  std::string detail;
  try {
    auto nl = make_power(2.0);
    const int N = 3;
    auto ws = make_workspace(nl, N, {});
    auto v2 = apply_N(apply_N(make_v0(ws)));

    std::vector<double> ds = {1e-2, 1e-3, 1e-4};
    std::vector<double> u2s;
    for (double d : ds) u2s.push_back(invert_uk(v2, 1.0 - d));
    std::vector<double> grid;
    for (double u = u2s.front() * 0.5; u <= u2s.back() * 2.0; u *= 2.0)
      grid.push_back(u);
    grid.push_back(u2s.back() * 2.0);
    auto table = three_term_table(nl, N, grid);

    double prev = 1e300;
    double ratio_mid = 0.0;
    for (size_t i = 0; i < ds.size(); ++i) {
      const double ratio = (ds[i] - table.R0_fn(u2s[i]) - table.R1_fn(u2s[i])) /
                           table.R2_fn(u2s[i]);
      if (ds[i] == 1e-3) {
        ratio_mid = ratio;
        ok &= ratio >= 0.5 && ratio <= 1.5;
      }
      ok &= std::abs(ratio - 1.0) < std::abs(prev - 1.0);
      prev = ratio;
    }
    detail = "implicit three-term relation: (d-R0-R1)/R2 at d=1e-3 is " +
             fmt(ratio_mid) + ", trend toward 1";
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string("exception: ") + e.what();
  }
  report(9, ok, detail, t.seconds());
}

void criterion_10() {
  Timer t;
  bool ok = true;
  std::string detail;
  try {
    double worst_a0 = 0.0;
    for (double p : {1.5, 2.0, 3.0, 5.0, 9.0}) {
      auto e = power_law_expansion(p, 3, 0);
      const double a0 = std::pow(2.0 * (p + 1.0) / ((p - 1.0) * (p - 1.0)),
                                 1.0 / (p - 1.0));
      worst_a0 = std::max(worst_a0, std::abs(e.a[0] / a0 - 1.0));
    }
    ok &= worst_a0 <= 1e-12;

    struct Case {
      double p;
      int N, order;
    };
    for (const Case& c :
         {Case{1.5, 3, 3}, Case{2.0, 3, 4}, Case{2.0, 5, 2}, Case{3.0, 2, 2},
          Case{3.0, 3, 2}, Case{5.0, 3, 1}, Case{9.0, 3, 1}}) {
      auto e = power_law_expansion(c.p, c.N, c.order);
      const double e_last = e.exponents.back();
      const double r1 = expansion_residual(e.a, e.m, c.p, c.N, 1e-2);
      const double r2 = expansion_residual(e.a, e.m, c.p, c.N, 1e-3);
      const double scale = std::pow(e.a[0] * std::pow(1e-3, -e.m), c.p);
      if (std::abs(r2) <= 1e-10 * scale) continue;  // exactly solved
      const double slope = std::log(std::abs(r2 / r1)) / std::log(1e-1);
      ok &= slope > e_last - 2.0 + 0.5;
    }

    std::mt19937 rng(20240817);
    std::uniform_real_distribution<double> pr(1.02, 12.0);
    for (int i = 0; i < 20; ++i) {
      const double p = pr(rng);
      ok &= singular_term_count(p) ==
            static_cast<int>(std::floor(2.0 / (p - 1.0))) + 1;
    }
    detail = "series engine: worst a0 deviation " + fmt(worst_a0) +
             ", residual orders consistent, term counts match";
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string("exception: ") + e.what();
  }
  report(10, ok, detail, t.seconds());
}

}  // namespace

int main() {
  Timer total;
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  std::printf("%d criterion check(s) failed; total %.2f s\n", g_failures,
              total.seconds());
  return g_failures == 0 ? 0 : 1;
}
