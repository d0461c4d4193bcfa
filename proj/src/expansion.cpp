#include "blowup/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace blowup {

namespace {

bool near_integer(double x, double tol = 1e-9) {
  return std::abs(x - std::round(x)) < tol;
}

}  // namespace

int singular_term_count(double p) {
  if (!(p > 1.0))
    throw std::invalid_argument("singular_term_count: requires p > 1");
  const double m = 2.0 / (p - 1.0);
  return static_cast<int>(std::floor(m + 1e-12)) + 1;
}

PowerLawExpansion power_law_expansion(double p, int N, int order) {
  if (!(p > 1.0))
    throw std::invalid_argument("power_law_expansion: requires p > 1");
  if (N < 1)
    throw std::invalid_argument("power_law_expansion: N must be >= 1");
  if (order < 0)
    throw std::invalid_argument("power_law_expansion: order must be >= 0");

  const double q = 0.5 * (p + 1.0);
  const double delta = q - 1.0;
  const double m = 1.0 / delta;  // = 2/(p-1)
  const double nu = N - 1;

  // Orders at and beyond 1 + 2m hit the resonant slot where the dropped
  // integration constant (or a logarithm) would enter; cap strictly below.
  const double kstar = 1.0 + 2.0 * m;
  const int kcap = static_cast<int>(std::floor(kstar - 1e-9));

  PowerLawExpansion out;
  out.p = p;
  out.N = N;
  out.m = m;
  out.K = static_cast<int>(std::floor(m + 1e-12));
  out.resonant_lattice = near_integer(m);
  out.requested_order = order;
  out.computed_order = std::min(order, kcap);

  const int n_target = out.computed_order;
  const double v_order_cap = -q + (n_target + 0.49) * delta;

  // profile derivative series in x = 1/u, scaled normalization F = u^{2q}/2
  PuiseuxSeries v =
      PuiseuxSeries::monomial(1.0, -q, delta, v_order_cap, "1/u");
  const PuiseuxSeries twoF = PuiseuxSeries::monomial(
      1.0, -2.0 * q, delta, std::numeric_limits<double>::max(), "1/u");
  const PuiseuxSeries one =
      PuiseuxSeries::monomial(1.0, 0.0, delta, std::numeric_limits<double>::max(), "1/u");

  for (int n = 0; n < n_target; ++n) {
    PuiseuxSeries inv_v = series_recip(v);
    PuiseuxSeries R = series_integrate_tail(inv_v);
    PuiseuxSeries D = series_recip(series_sub(one, R));
    PuiseuxSeries integrand = series_mul(v, D);
    PuiseuxSeries P = series_antiderivative(integrand);
    PuiseuxSeries T = series_sub(twoF, series_scale(P, 2.0 * nu));
    v = series_sqrt(T);
    // discard depth beyond the requested order; it is exactly the range
    // where the dropped integration constant (the resonant slot) would
    // start to matter
    v = PuiseuxSeries(v.alpha(), v.delta(), v.coeffs(),
                      std::min(v.order(), v_order_cap), v.variable());
  }

  // invert the boundary relation S(u) = d order by order
  PuiseuxSeries S = series_integrate_tail(series_recip(v));
  const double A = S.coeffs().empty() ? 0.0 : S.coeffs()[0];
  if (!(A > 0.0))
    throw std::logic_error("power_law_expansion: degenerate boundary series");
  // S ~ A x^delta, so the inversion exponent 1/delta equals m
  std::vector<double> ec(S.terms());
  if (!ec.empty()) ec[0] = 0.0;
  for (size_t k = 1; k < S.terms(); ++k) ec[k] = S.coeffs()[k] / A;
  PuiseuxSeries E(0.0, delta, std::move(ec), S.order() - S.alpha(), "1/u");

  const double B = std::pow(A, m);
  const double u_order_cap = -m + n_target + 0.49;
  PuiseuxSeries u =
      PuiseuxSeries::monomial(B, -m, 1.0, u_order_cap, "d");

  for (int pass = 0; pass < n_target + 2; ++pass) {
    // W with u = B d^-m (1 + W)
    std::vector<double> wc(u.terms());
    if (!wc.empty()) wc[0] = 0.0;
    for (size_t k = 1; k < u.terms(); ++k) wc[k] = u.coeffs()[k] / B;
    PuiseuxSeries W(0.0, 1.0, std::move(wc), u.order() + m, "d");

    // M(d) = E evaluated along u(d)
    PuiseuxSeries M(0.0, 1.0, {}, u_order_cap + m, "d");
    for (size_t k = 1; k < E.terms(); ++k) {
      const double cE = E.coeffs()[k];
      if (cE == 0.0) continue;
      const double kd = static_cast<double>(k) * delta;
      PuiseuxSeries pw = series_pow_one_plus(W, -kd);
      PuiseuxSeries term = series_scale(pw, cE * std::pow(B, -kd));
      PuiseuxSeries shifted(term.alpha() + static_cast<double>(k),
                            term.delta(), term.coeffs(),
                            term.order() + static_cast<double>(k), "d");
      M = series_add(M, shifted);
    }
    PuiseuxSeries lead =
        PuiseuxSeries::monomial(B, -m, 1.0, u_order_cap, "d");
    u = series_mul(lead, series_pow_one_plus(M, m));
  }

  // back to the f(u) = u^p normalization
  const double factor = std::pow(q, 1.0 / (p - 1.0));
  out.normalization_factor = factor;
  PuiseuxSeries u_out = series_scale(u, factor);
  out.u_series = u_out;
  const int n_terms = static_cast<int>(u_out.terms());
  for (int k = 0; k <= out.computed_order && k < n_terms; ++k) {
    out.a.push_back(u_out.coeffs()[static_cast<size_t>(k)]);
    out.exponents.push_back(static_cast<double>(k) - m);
  }
  if (static_cast<int>(out.a.size()) <= out.computed_order) {
    std::ostringstream msg;
    msg << "power_law_expansion: order bookkeeping produced only "
        << out.a.size() << " coefficients of " << out.computed_order + 1;
    throw std::logic_error(msg.str());
  }
  return out;
}

ThreeTermTable three_term_table(const Nonlinearity& nl, int N,
                                std::span<const double> Ugrid,
                                double lower_limit) {
  if (Ugrid.empty())
    throw std::invalid_argument("three_term_table: empty height grid");
  if (!keller_osserman(nl).holds())
    throw std::invalid_argument(
        "three_term_table: blow-up existence condition fails");
  const double ll =
      std::isnan(lower_limit) ? std::max(nl.a(), 0.0) : lower_limit;
  const double nu = N - 1;

  std::vector<double> Us(Ugrid.begin(), Ugrid.end());
  std::sort(Us.begin(), Us.end());
  const double Utop = Us.back();

  ThreeTermTable out;
  out.N = N;
  out.lower_limit = ll;
  out.U = Us;

  const TailModel& tm = nl.tail();
  const bool power = tm.kind == TailModel::Kind::PowerLaw;
  const double s = tm.exponent_or_rate;

  // R0: distance functional
  auto inv_v0 = [nl](double t) { return 1.0 / nl.sqrt2F(t); };
  auto S0 = std::make_shared<UpperTailIntegral>(
      inv_v0, std::min(Us.front(), std::max(nl.a() + 1.0, 1.0)),
      std::min(4.0 * Utop, 0.5 * nl.huge_u()), nl.inv_sqrt_2F_tail());
  out.R0_fn = [S0](double u) { return (*S0)(u); };

  // R1: first correction functional
  auto G = std::make_shared<GEvaluator>(nl, ll);
  auto integrand1 = [nl, G](double t) {
    const double v0 = nl.sqrt2F(t);
    return (*G)(t) / (v0 * v0 * v0);
  };
  IntegrandTail d1 = power ? IntegrandTail::power(s - 1.0, tm.cutoff, 1e-6)
                           : (tm.kind == TailModel::Kind::Exponential
                                  ? IntegrandTail::exponential(
                                        tm.exponent_or_rate, tm.cutoff, 1e-6)
                                  : IntegrandTail::sampled(tm.cutoff));
  auto I1 = std::make_shared<UpperTailIntegral>(
      integrand1, Us.front(), std::min(4.0 * Utop, 0.5 * nl.huge_u()), d1);
  out.R1_fn = [I1, nu](double u) { return nu * (*I1)(u); };

  // R2: second correction functional. The inner cumulative
  //   W(u) = int_ll^u [ sqrt(2F) S0(t) - nu G(t)/sqrt(2F) ] dt
  // collects the two t-level corrections; the outer integrand adds the
  // square of the first-order term.
  auto inner_fn = [nl, G, S0, nu](double t) {
    const double v0 = nl.sqrt2F(t);
    if (v0 == 0.0) return 0.0;
    return v0 * (*S0)(t) - nu * (*G)(t) / v0;
  };
  auto W = std::make_shared<CachedAntiderivative>(
      inner_fn, ll, std::min(64.0 * Utop, 0.45 * nl.huge_u()));
  auto integrand2 = [nl, G, W, nu](double t) {
    const double v0 = nl.sqrt2F(t);
    const double twoF = v0 * v0;
    const double Gt = (*G)(t);
    return ((*W)(t) + 1.5 * nu * Gt * Gt / twoF) / (twoF * v0);
  };
  IntegrandTail d2 =
      power ? IntegrandTail::power(1.5 * s - 2.0, tm.cutoff, 1e-5)
            : IntegrandTail::decay_probe(tm.cutoff);
  auto I2 = std::make_shared<UpperTailIntegral>(
      integrand2, Us.front(), std::min(4.0 * Utop, 0.5 * nl.huge_u()), d2);
  out.R2_fn = [I2, nu](double u) { return nu * (*I2)(u); };

  for (double u : Us) {
    out.R0.push_back(out.R0_fn(u));
    out.R1.push_back(out.R1_fn(u));
    out.R2.push_back(out.R2_fn(u));
  }
  return out;
}

double invert_three_term(const ThreeTermTable& table, double r) {
  if (!(r > 0.0 && r < 1.0))
    throw std::invalid_argument("invert_three_term: r must lie in (0, 1)");
  const double d = 1.0 - r;
  const double lo = table.U.front(), hi = table.U.back();
  const double top = table.total(lo), bot = table.total(hi);
  if (d > top || d < bot) {
    std::ostringstream msg;
    msg << "invert_three_term: target " << d << " outside table range ["
        << bot << ", " << top << "]";
    throw std::out_of_range(msg.str());
  }
  auto fn = [&table](double u) { return table.total(u); };
  return invert_monotone(fn, d, lo, hi, 1e-11 * d);
}

}  // namespace blowup
