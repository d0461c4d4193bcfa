#include "blowup/series.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace blowup {

namespace {

constexpr double kExpTol = 1e-9;

bool near_int(double x) { return std::abs(x - std::round(x)) < kExpTol; }

void require_compatible(const PuiseuxSeries& a, const PuiseuxSeries& b) {
  if (a.variable() != b.variable())
    throw std::invalid_argument("series: mixing variables '" + a.variable() +
                                "' and '" + b.variable() + "'");
  if (std::abs(a.delta() - b.delta()) >
      kExpTol * std::max(a.delta(), b.delta()))
    throw std::invalid_argument("series: incompatible lattice steps");
}

size_t terms_within(double alpha, double delta, double order) {
  if (order < alpha - kExpTol) return 0;
  return static_cast<size_t>(std::floor((order - alpha) / delta + kExpTol)) + 1;
}

}  // namespace

PuiseuxSeries::PuiseuxSeries(double alpha, double delta,
                             std::vector<double> coeffs, double order,
                             std::string variable)
    : alpha_(alpha),
      delta_(delta),
      coeffs_(std::move(coeffs)),
      order_(order),
      variable_(std::move(variable)) {
  if (!(delta_ > 0.0))
    throw std::invalid_argument("PuiseuxSeries: lattice step must be positive");
  const size_t keep = terms_within(alpha_, delta_, order_);
  if (coeffs_.size() > keep) coeffs_.resize(keep);
}

PuiseuxSeries PuiseuxSeries::monomial(double c, double alpha, double delta,
                                      double order, std::string variable) {
  return PuiseuxSeries(alpha, delta, {c}, order, std::move(variable));
}

double PuiseuxSeries::coeff_at_exponent(double e) const {
  const double k = (e - alpha_) / delta_;
  if (k < -kExpTol || !near_int(k)) return 0.0;
  const size_t i = static_cast<size_t>(std::llround(k));
  return i < coeffs_.size() ? coeffs_[i] : 0.0;
}

bool PuiseuxSeries::is_zero() const {
  for (double c : coeffs_)
    if (c != 0.0) return false;
  return true;
}

double PuiseuxSeries::eval(double x) const {
  double acc = 0.0;
  for (size_t k = 0; k < coeffs_.size(); ++k)
    acc += coeffs_[k] * std::pow(x, exponent(k));
  return acc;
}

PuiseuxSeries PuiseuxSeries::normalized() const {
  size_t lead = 0;
  while (lead < coeffs_.size() && coeffs_[lead] == 0.0) ++lead;
  if (lead == coeffs_.size())
    return PuiseuxSeries(alpha_, delta_, {}, order_, variable_);
  std::vector<double> c(coeffs_.begin() + lead, coeffs_.end());
  return PuiseuxSeries(alpha_ + lead * delta_, delta_, std::move(c), order_,
                       variable_);
}

PuiseuxSeries series_add(const PuiseuxSeries& a, const PuiseuxSeries& b) {
  require_compatible(a, b);
  if (a.terms() == 0) return PuiseuxSeries(b.alpha(), b.delta(), b.coeffs(),
                                           std::min(a.order(), b.order()),
                                           b.variable());
  if (b.terms() == 0) return PuiseuxSeries(a.alpha(), a.delta(), a.coeffs(),
                                           std::min(a.order(), b.order()),
                                           a.variable());
  const double delta = a.delta();
  const double off = (b.alpha() - a.alpha()) / delta;
  if (!near_int(off))
    throw std::invalid_argument("series_add: lattices are not aligned");
  const double alpha = std::min(a.alpha(), b.alpha());
  const double order = std::min(a.order(), b.order());
  const size_t n = terms_within(alpha, delta, order);
  std::vector<double> c(n, 0.0);
  auto scatter = [&](const PuiseuxSeries& s) {
    const long base = std::llround((s.alpha() - alpha) / delta);
    for (size_t k = 0; k < s.terms(); ++k) {
      const size_t i = static_cast<size_t>(base) + k;
      if (i < n) c[i] += s.coeffs()[k];
    }
  };
  scatter(a);
  scatter(b);
  return PuiseuxSeries(alpha, delta, std::move(c), order, a.variable());
}

PuiseuxSeries series_sub(const PuiseuxSeries& a, const PuiseuxSeries& b) {
  return series_add(a, series_scale(b, -1.0));
}

PuiseuxSeries series_scale(const PuiseuxSeries& a, double factor) {
  std::vector<double> c = a.coeffs();
  for (double& v : c) v *= factor;
  return PuiseuxSeries(a.alpha(), a.delta(), std::move(c), a.order(),
                       a.variable());
}

PuiseuxSeries series_mul(const PuiseuxSeries& a, const PuiseuxSeries& b) {
  require_compatible(a, b);
  const double order =
      std::min(a.order() + b.alpha(), b.order() + a.alpha());
  const double alpha = a.alpha() + b.alpha();
  const double delta = a.delta();
  if (a.terms() == 0 || b.terms() == 0)
    return PuiseuxSeries(alpha, delta, {}, order, a.variable());
  const size_t n = terms_within(alpha, delta, order);
  std::vector<double> c(n, 0.0);
  for (size_t i = 0; i < a.terms(); ++i)
    for (size_t j = 0; j < b.terms(); ++j) {
      const size_t k = i + j;
      if (k < n) c[k] += a.coeffs()[i] * b.coeffs()[j];
    }
  return PuiseuxSeries(alpha, delta, std::move(c), order, a.variable());
}

PuiseuxSeries series_recip(const PuiseuxSeries& s) {
  const PuiseuxSeries t = s.normalized();
  if (t.terms() == 0 || t.coeffs()[0] == 0.0)
    throw std::invalid_argument("series_recip: zero leading coefficient");
  const double c0 = t.coeffs()[0];
  // s = c0 x^alpha (1 + h); 1/s = (1/c0) x^-alpha sum (-h)^j
  const double rel_order = t.order() - t.alpha();
  std::vector<double> hc(t.terms());
  hc[0] = 0.0;
  for (size_t k = 1; k < t.terms(); ++k) hc[k] = t.coeffs()[k] / c0;
  PuiseuxSeries h(0.0, t.delta(), std::move(hc), rel_order, t.variable());

  PuiseuxSeries acc = PuiseuxSeries::monomial(1.0, 0.0, t.delta(), rel_order,
                                              t.variable());
  PuiseuxSeries hpow = acc;
  const size_t jmax = std::min<size_t>(terms_within(0.0, t.delta(), rel_order), 400);
  for (size_t j = 1; j <= jmax; ++j) {
    hpow = series_mul(hpow, h);
    if (hpow.is_zero()) break;
    acc = series_add(acc, series_scale(hpow, (j % 2) ? -1.0 : 1.0));
  }
  PuiseuxSeries out = series_scale(acc, 1.0 / c0);
  return PuiseuxSeries(out.alpha() - t.alpha(), out.delta(), out.coeffs(),
                       t.order() - 2.0 * t.alpha(), out.variable());
}

PuiseuxSeries series_pow_one_plus(const PuiseuxSeries& h, double e) {
  const PuiseuxSeries hn = h.normalized();
  if (hn.terms() > 0 && hn.alpha() <= kExpTol)
    throw std::invalid_argument(
        "series_pow_one_plus: h must have positive leading exponent");
  PuiseuxSeries acc = PuiseuxSeries::monomial(1.0, 0.0, h.delta(), h.order(),
                                              h.variable());
  PuiseuxSeries hpow = acc;
  double binom = 1.0;
  const size_t jmax =
      h.order() > 0
          ? std::min<size_t>(terms_within(0.0, h.delta(), h.order()), 400)
          : 0;
  for (size_t j = 1; j <= jmax; ++j) {
    binom *= (e - static_cast<double>(j) + 1.0) / static_cast<double>(j);
    hpow = series_mul(hpow, h);
    if (hpow.is_zero() || binom == 0.0) break;
    acc = series_add(acc, series_scale(hpow, binom));
  }
  return acc;
}

PuiseuxSeries series_sqrt(const PuiseuxSeries& s) {
  const PuiseuxSeries t = s.normalized();
  if (t.terms() == 0 || !(t.coeffs()[0] > 0.0))
    throw std::invalid_argument(
        "series_sqrt: leading coefficient must be positive");
  const double c0 = t.coeffs()[0];
  const double rel_order = t.order() - t.alpha();
  std::vector<double> hc(t.terms());
  hc[0] = 0.0;
  for (size_t k = 1; k < t.terms(); ++k) hc[k] = t.coeffs()[k] / c0;
  PuiseuxSeries h(0.0, t.delta(), std::move(hc), rel_order, t.variable());
  PuiseuxSeries root = series_pow_one_plus(h, 0.5);
  PuiseuxSeries scaled = series_scale(root, std::sqrt(c0));
  return PuiseuxSeries(scaled.alpha() + 0.5 * t.alpha(), scaled.delta(),
                       scaled.coeffs(), t.order() - 0.5 * t.alpha(),
                       scaled.variable());
}

PuiseuxSeries series_integrate_tail(const PuiseuxSeries& s) {
  std::vector<double> c(s.terms());
  for (size_t k = 0; k < s.terms(); ++k) {
    const double E = s.exponent(k);
    if (E <= 1.0 + kExpTol && s.coeffs()[k] != 0.0)
      throw std::domain_error(
          "series_integrate_tail: divergent tail term with exponent " +
          std::to_string(E));
    c[k] = s.coeffs()[k] / (E - 1.0);
  }
  return PuiseuxSeries(s.alpha() - 1.0, s.delta(), std::move(c),
                       s.order() - 1.0, s.variable());
}

PuiseuxSeries series_antiderivative(const PuiseuxSeries& s) {
  std::vector<double> c(s.terms());
  for (size_t k = 0; k < s.terms(); ++k) {
    const double E = s.exponent(k);
    if (std::abs(E - 1.0) < kExpTol && s.coeffs()[k] != 0.0)
      throw std::domain_error(
          "series_antiderivative: resonant term with exponent one produces a "
          "logarithm");
    c[k] = s.coeffs()[k] / (1.0 - E);
  }
  // dropping the integration constant caps trust below exponent zero
  const double order = std::min(s.order() - 1.0, -0.5 * s.delta());
  return PuiseuxSeries(s.alpha() - 1.0, s.delta(), std::move(c), order,
                       s.variable());
}

PuiseuxSeries series_compose_shift(const PuiseuxSeries& s,
                                   const PuiseuxSeries& g) {
  if (g.terms() > 0 && g.alpha() <= kExpTol)
    throw std::invalid_argument(
        "series_compose_shift: shift must have positive leading exponent");
  // c x^E (1+g)^E summed over terms; lattices must agree
  PuiseuxSeries acc(s.alpha(), s.delta(), {}, std::min(s.order(), g.order() + s.alpha()),
                    s.variable());
  for (size_t k = 0; k < s.terms(); ++k) {
    const double E = s.exponent(k);
    if (s.coeffs()[k] == 0.0) continue;
    PuiseuxSeries pw = series_pow_one_plus(g, E);
    PuiseuxSeries term = series_scale(pw, s.coeffs()[k]);
    PuiseuxSeries shifted(term.alpha() + E, term.delta(), term.coeffs(),
                          term.order() + E, term.variable());
    acc = series_add(acc, shifted);
  }
  return acc;
}

}  // namespace blowup
