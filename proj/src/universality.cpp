#include "blowup/universality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace blowup {

PhiEvaluator::PhiEvaluator(const Nonlinearity& nl, double lower_limit)
    : nl_(nl),
      ll_(std::isnan(lower_limit) ? std::max(nl.a(), 0.0) : lower_limit) {
  G_ = std::make_shared<GEvaluator>(nl_, ll_);
  auto G = G_;
  auto n = nl_;
  auto integrand = [n, G](double t) {
    const double v0 = n.sqrt2F(t);
    if (v0 == 0.0) return 0.0;
    return (*G)(t) / (v0 * v0 * v0);
  };
  const TailModel& tm = nl_.tail();
  IntegrandTail desc =
      tm.kind == TailModel::Kind::PowerLaw
          ? IntegrandTail::power(tm.exponent_or_rate - 1.0, tm.cutoff, 1e-6)
          : (tm.kind == TailModel::Kind::Exponential
                 ? IntegrandTail::exponential(tm.exponent_or_rate, tm.cutoff,
                                              1e-6)
                 : IntegrandTail::sampled(tm.cutoff));
  const double lo = ll_ + 1e-6 * std::max(1.0, std::abs(ll_));
  const double top =
      std::min(0.25 * nl_.huge_u(), std::max(1e8, 100.0 * tm.cutoff));
  outer_ = std::make_shared<UpperTailIntegral>(integrand, lo, top, desc);
}

double PhiEvaluator::outer(double u) const { return (*outer_)(u); }

double PhiEvaluator::operator()(double u) const {
  return nl_.sqrt2F(u) * (*outer_)(u);
}

double phi(const Nonlinearity& nl, double u, double lower_limit) {
  return PhiEvaluator(nl, lower_limit)(u);
}

const char* to_string(UniversalityReport::Class c) {
  switch (c) {
    case UniversalityReport::Class::Universal: return "Universal";
    case UniversalityReport::Class::NonUniversal: return "NonUniversal";
    case UniversalityReport::Class::Inconclusive: return "Inconclusive";
  }
  return "?";
}

UniversalityReport classify(const Nonlinearity& nl) {
  const KoResult ko = keller_osserman(nl);
  if (ko.verdict == Verdict::Fails)
    throw std::invalid_argument(
        "classify: blow-up existence condition fails");

  UniversalityReport rep;
  PhiEvaluator Phi(nl);

  // doubling ladder, stopped by the overflow guard on F
  const double base = std::max(nl.a() + 1.0, 1.0);
  double u = base;
  while (rep.u_samples.size() < 340 && u < nl.huge_u()) {
    rep.u_samples.push_back(u);
    rep.phi_samples.push_back(Phi(u));
    u *= 2.0;
  }

  // sampled rule: "toward zero" needs the last sample below a tenth of the
  // first and monotone decrease over the final decade; "bounded below" needs
  // the final decade to stay above half the overall median.
  const auto& ph = rep.phi_samples;
  const size_t n = ph.size();
  if (n >= 8) {
    const size_t dec = 4;  // ~one decade of doublings plus change
    bool decreasing_final = true;
    for (size_t i = n - dec; i + 1 < n; ++i)
      if (ph[i + 1] > ph[i] * (1.0 + 1e-12)) decreasing_final = false;
    double min_last = std::numeric_limits<double>::infinity();
    for (size_t i = n - dec; i < n; ++i) min_last = std::min(min_last, ph[i]);
    std::vector<double> sorted(ph);
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[n / 2];

    if (decreasing_final && ph.back() < 0.1 * ph.front())
      rep.sampled_verdict = UniversalityReport::Class::Universal;
    else if (min_last > 0.5 * median)
      rep.sampled_verdict = UniversalityReport::Class::NonUniversal;
    else
      rep.sampled_verdict = UniversalityReport::Class::Inconclusive;
  }

  const TailModel& tm = nl.tail();
  if (tm.kind == TailModel::Kind::PowerLaw) {
    rep.has_closed_rule = true;
    const double s = tm.exponent_or_rate;
    if (s > 4.0) {
      rep.verdict = UniversalityReport::Class::Universal;
      rep.closed_form_limit = 0.0;
    } else if (s == 4.0) {
      rep.verdict = UniversalityReport::Class::NonUniversal;
      rep.closed_form_limit =
          1.0 / ((0.5 * s + 1.0) * (s - 2.0) * std::sqrt(2.0 * tm.amplitude));
    } else {
      rep.verdict = UniversalityReport::Class::NonUniversal;
      rep.closed_form_limit = std::numeric_limits<double>::infinity();
    }
  } else if (tm.kind == TailModel::Kind::Exponential) {
    rep.has_closed_rule = true;
    rep.verdict = UniversalityReport::Class::Universal;
    rep.closed_form_limit = 0.0;
  } else {
    rep.verdict = ko.verdict == Verdict::Inconclusive
                      ? UniversalityReport::Class::Inconclusive
                      : rep.sampled_verdict;
  }
  return rep;
}

UniversalityReport universality_report(const Nonlinearity& nl, int N,
                                       std::span<const double> rs,
                                       const PicardConfig& cfg) {
  UniversalityReport rep = classify(nl);
  auto gaps = second_term_gap(nl, N, rs, cfg);
  rep.gap_r = gaps.r;
  rep.gap_values = gaps.gap;
  return rep;
}

SecondTermGapTable second_term_gap(const Nonlinearity& nl, int N,
                                   std::span<const double> rs,
                                   const PicardConfig& cfg) {
  auto ws = make_workspace(nl, N, cfg);
  VIterate v0 = make_v0(ws);
  VIterate v1 = apply_N(v0);
  PhiEvaluator Phi(nl);

  SecondTermGapTable out;
  for (double r : rs) {
    const double u0 = invert_uk(v0, r);
    const double u1 = invert_uk(v1, r);
    const double F0 = nl.F(u0);
    out.r.push_back(r);
    out.u0.push_back(u0);
    out.u1.push_back(u1);
    out.gap.push_back(u1 - u0);
    out.gap_normalized.push_back((u1 - u0) / nl.sqrt2F(u0));
    out.upper_rhs.push_back((N - 1) * Phi.outer(u1));
    out.lower_lhs.push_back(Phi.outer(u0) - Phi.outer(u1));
    // int_{u0}^{u1} t dt = (u1^2 - u0^2)/2 against the frozen 2F(u0)
    out.lower_rhs.push_back((u1 * u1 - u0 * u0) / (4.0 * F0));
  }
  return out;
}

OneTermTable verify_one_term(const Nonlinearity& nl, const RadialSolution& sol,
                             std::span<const double> rs) {
  PhiEvaluator Phi(nl);
  EnergyProfile leading(nl, 0.0);

  OneTermTable out;
  for (double r : rs) {
    const double u_or = sol.u_at(r);
    const double u0 = leading.u_at(r);
    const double bound = Phi(u_or);
    out.r.push_back(r);
    out.u_oracle.push_back(u_or);
    out.u0.push_back(u0);
    out.gap.push_back(u_or - u0);
    out.bound.push_back(bound);
    out.fitted_C.push_back((u_or - u0) / bound);
  }
  return out;
}

}  // namespace blowup
