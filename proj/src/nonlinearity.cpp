#include "blowup/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "blowup/expression.hpp"

namespace blowup {

namespace {
constexpr double kOverflowGuard = 1e100;
}

TailModel TailModel::power_law(double amplitude, double exponent, double cutoff,
                               double validation_tol) {
  if (!(amplitude > 0.0))
    throw std::invalid_argument("TailModel: amplitude must be positive");
  if (!(exponent > 0.0))
    throw std::invalid_argument("TailModel: power-law exponent must be positive");
  TailModel t;
  t.kind = Kind::PowerLaw;
  t.amplitude = amplitude;
  t.exponent_or_rate = exponent;
  t.cutoff = cutoff;
  t.validation_tol = validation_tol;
  return t;
}

TailModel TailModel::exponential(double amplitude, double rate, double cutoff,
                                 double validation_tol) {
  if (!(amplitude > 0.0))
    throw std::invalid_argument("TailModel: amplitude must be positive");
  if (!(rate > 0.0))
    throw std::invalid_argument("TailModel: rate must be positive");
  TailModel t;
  t.kind = Kind::Exponential;
  t.amplitude = amplitude;
  t.exponent_or_rate = rate;
  t.cutoff = cutoff;
  t.validation_tol = validation_tol;
  return t;
}

TailModel TailModel::numeric_only(double cutoff) {
  TailModel t;
  t.kind = Kind::NumericOnly;
  t.cutoff = cutoff;
  return t;
}

double TailModel::value(double u) const {
  switch (kind) {
    case Kind::PowerLaw:
      return amplitude * std::pow(u, exponent_or_rate);
    case Kind::Exponential:
      return amplitude * std::exp(exponent_or_rate * u);
    case Kind::NumericOnly:
      return std::numeric_limits<double>::quiet_NaN();
  }
  return std::numeric_limits<double>::quiet_NaN();
}

CachedAntiderivative::CachedAntiderivative(
    RealFn integrand, double base, double eager_top,
    std::function<double(double)> value_model)
    : fn_(std::move(integrand)), base_(base), model_(std::move(value_model)) {
  if (!(eager_top > base))
    throw std::invalid_argument("CachedAntiderivative: eager_top <= base");

  const double span = eager_top - base;
  double step = std::max(1e-8 * std::max(1.0, std::abs(base)), 1e-8 * span);
  xs_.push_back(base);
  vals_.push_back(0.0);
  QuadratureSpec tight{1e-12, 1e-300, 400000};
  double x = base;
  while (x < eager_top) {
    double next = std::min(x + step, eager_top);
    const double piece = integrate_finite(fn_, x, next, tight);
    xs_.push_back(next);
    vals_.push_back(vals_.back() + piece);
    x = next;
    step *= 2.0;
  }
  if (model_) model_offset_ = vals_.back() - model_(xs_.back());
}

double CachedAntiderivative::operator()(double x) const {
  QuadratureSpec tight{1e-12, 1e-300, 400000};
  if (x < base_) return -integrate_finite(fn_, x, base_, tight);
  if (x > xs_.back()) {
    if (model_) return model_(x) + model_offset_;
    return vals_.back() + integrate_finite(fn_, xs_.back(), x, tight);
  }
  const size_t i =
      std::upper_bound(xs_.begin(), xs_.end(), x) - xs_.begin();
  const size_t k = (i == 0) ? 0 : i - 1;
  return vals_[k] + integrate_finite(fn_, xs_[k], x, tight);
}

struct Nonlinearity::Impl {
  RealFn f, F;
  double a = 0.0;
  TailModel tail;
  std::string label;
  double huge_u = 1e100;
};

double Nonlinearity::f(double u) const { return impl_->f(u); }
double Nonlinearity::F(double u) const { return impl_->F(u); }
double Nonlinearity::sqrt2F(double u) const {
  const double v = impl_->F(u);
  return v > 0.0 ? std::sqrt(2.0 * v) : 0.0;
}
double Nonlinearity::a() const { return impl_->a; }
const TailModel& Nonlinearity::tail() const { return impl_->tail; }
const std::string& Nonlinearity::label() const { return impl_->label; }
double Nonlinearity::huge_u() const { return impl_->huge_u; }

IntegrandTail Nonlinearity::inv_sqrt_2F_tail() const {
  const TailModel& t = impl_->tail;
  const double vtol = std::max(5.0 * t.validation_tol, 1e-9);
  switch (t.kind) {
    case TailModel::Kind::PowerLaw:
      return IntegrandTail::power(0.5 * t.exponent_or_rate, t.cutoff, vtol);
    case TailModel::Kind::Exponential:
      return IntegrandTail::exponential(0.5 * t.exponent_or_rate, t.cutoff,
                                        vtol);
    case TailModel::Kind::NumericOnly:
      return IntegrandTail::sampled(t.cutoff);
  }
  return IntegrandTail::sampled(t.cutoff);
}

IntegrandTail Nonlinearity::inv_F_tail() const {
  const TailModel& t = impl_->tail;
  const double vtol = std::max(5.0 * t.validation_tol, 1e-9);
  switch (t.kind) {
    case TailModel::Kind::PowerLaw:
      return IntegrandTail::power(t.exponent_or_rate, t.cutoff, vtol);
    case TailModel::Kind::Exponential:
      return IntegrandTail::exponential(t.exponent_or_rate, t.cutoff, vtol);
    case TailModel::Kind::NumericOnly:
      return IntegrandTail::sampled(t.cutoff);
  }
  return IntegrandTail::sampled(t.cutoff);
}

namespace {

double solve_huge_u(const TailModel& tail, RealFn F, double from) {
  switch (tail.kind) {
    case TailModel::Kind::PowerLaw:
      return std::pow(kOverflowGuard / tail.amplitude,
                      1.0 / tail.exponent_or_rate);
    case TailModel::Kind::Exponential:
      return std::log(kOverflowGuard / tail.amplitude) / tail.exponent_or_rate;
    case TailModel::Kind::NumericOnly: {
      double u = std::max(from, 1.0);
      for (int i = 0; i < 60 && F(u) < kOverflowGuard; ++i) u *= 2.0;
      return u;
    }
  }
  return kOverflowGuard;
}

void check_positivity(const RealFn& f, double a, double top,
                      const std::string& label) {
  const int n = 1000;
  const double lo_off = 1e-9 * std::max(1.0, std::abs(a));
  const double hi_off = std::max(top - a, 10.0 * lo_off);
  double max_f = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double t =
        a + lo_off * std::pow(hi_off / lo_off, static_cast<double>(i) / (n - 1));
    const double v = f(t);
    if (std::isnan(v) || v < -1e-12 * (1.0 + std::abs(v))) {
      std::ostringstream msg;
      msg << label << ": positivity violated, f(" << t << ") = " << v;
      throw std::invalid_argument(msg.str());
    }
    max_f = std::max(max_f, v);
  }
  if (!(max_f > 0.0))
    throw std::invalid_argument(label +
                                ": f vanishes on the entire sampled range");
}

void check_derivative_consistency(const RealFn& f, const RealFn& F, double a,
                                  double top, const std::string& label) {
  const int n = 100;
  const double lo = a + 1.0;
  if (!(top > lo)) return;
  const double eps = std::numeric_limits<double>::epsilon();
  for (int i = 0; i < n; ++i) {
    const double u =
        lo * std::pow(top / lo, static_cast<double>(i) / (n - 1));
    // capped absolutely so oscillations on an O(1) scale stay resolved
    const double h = std::min(1e-5 * std::max(1.0, std::abs(u)), 1e-2);
    auto central = [&](double step) {
      return (F(u + step) - F(u - step)) / (2.0 * step);
    };
    // Richardson-extrapolated central difference. The second term of the
    // tolerance is the rounding floor of the difference quotient itself,
    // which dominates wherever |f| is locally tiny against F.
    const double diff = (16.0 * central(h / 4.0) - central(h)) / 15.0;
    const double fv = f(u);
    const double rounding_floor = 16.0 * eps * std::abs(F(u)) / h;
    if (std::abs(diff - fv) > 1e-6 * (1.0 + std::abs(fv)) + rounding_floor) {
      std::ostringstream msg;
      msg << label << ": F' != f at u = " << u << " (central difference "
          << diff << ", f " << fv << ")";
      throw std::invalid_argument(msg.str());
    }
  }
}

void check_monotone_F(const RealFn& F, double a, double top,
                      const std::string& label) {
  const int n = 200;
  const double lo_off = 1e-6 * std::max(1.0, std::abs(a));
  double prev = F(a + lo_off);
  for (int i = 1; i < n; ++i) {
    const double t = a + lo_off * std::pow((top - a) / lo_off,
                                           static_cast<double>(i) / (n - 1));
    const double v = F(t);
    if (v < prev - 1e-10 * (1.0 + std::abs(prev))) {
      std::ostringstream msg;
      msg << label << ": F is decreasing near u = " << t;
      throw std::invalid_argument(msg.str());
    }
    prev = v;
  }
}

void check_tail_model(const RealFn& F, const TailModel& tail,
                      const std::string& label) {
  if (tail.kind == TailModel::Kind::NumericOnly) return;
  for (double mult : {1.0, 2.0, 4.0, 8.0}) {
    double u = tail.cutoff * mult;
    if (tail.kind == TailModel::Kind::Exponential)
      u = tail.cutoff + (mult - 1.0) * 2.0 / tail.exponent_or_rate;
    const double model = tail.value(u);
    if (!(model > 0.0) || model > kOverflowGuard) continue;
    const double got = F(u);
    if (std::abs(got / model - 1.0) > tail.validation_tol) {
      std::ostringstream msg;
      msg << label << ": F deviates from its tail model at u = " << u
          << " (F = " << got << ", model = " << model << ")";
      throw std::invalid_argument(msg.str());
    }
  }
}

}  // namespace

Nonlinearity make_from_functions(RealFn f, RealFn F, double a, TailModel tail,
                                 std::string label, bool check_base_point) {
  auto impl = std::make_shared<Nonlinearity::Impl>();
  impl->f = std::move(f);
  impl->F = std::move(F);
  impl->a = a;
  impl->tail = tail;
  impl->label = std::move(label);

  const double sample_top =
      std::max({a + 10.0, 10.0 * tail.cutoff, 10.0 * std::abs(a)});
  check_positivity(impl->f, a, sample_top, impl->label);
  check_monotone_F(impl->F, a, sample_top, impl->label);
  check_derivative_consistency(impl->f, impl->F, a, sample_top, impl->label);
  check_tail_model(impl->F, tail, impl->label);
  if (check_base_point) {
    const double base = impl->F(a);
    if (std::abs(base) > 1e-9)
      throw std::invalid_argument(impl->label + ": F(a) must vanish");
  }
  impl->huge_u = solve_huge_u(tail, impl->F, sample_top);
  return Nonlinearity(std::move(impl));
}

Nonlinearity make_power(double p) {
  if (!(p > 1.0))
    throw std::invalid_argument("make_power: requires p > 1");
  auto f = [p](double u) { return u > 0.0 ? std::pow(u, p) : 0.0; };
  auto F = [p](double u) {
    return u > 0.0 ? std::pow(u, p + 1.0) / (p + 1.0) : 0.0;
  };
  std::ostringstream label;
  label << "u^" << p;
  return make_from_functions(
      f, F, 0.0, TailModel::power_law(1.0 / (p + 1.0), p + 1.0, 1.0, 1e-10),
      label.str());
}

Nonlinearity make_exponential() {
  auto e = [](double u) { return std::exp(u); };
  return make_from_functions(e, e, 0.0,
                             TailModel::exponential(1.0, 1.0, 1.0, 1e-10),
                             "exp(u)", /*check_base_point=*/false);
}

Nonlinearity make_custom(const std::string& expr, double a, TailModel tail) {
  RealFn f = parse_expression(expr);
  {
    const double fa = f(a);
    if (!(fa > 0.0)) {
      std::ostringstream msg;
      msg << "make_custom: f(a) = " << fa << " is not positive at a = " << a;
      throw std::invalid_argument(msg.str());
    }
  }
  // The ladder must cover the construction-check sampling range (10x the
  // tail cutoff); beyond it F follows the smooth tail model.
  const double top = std::max({a + 10.0, 12.0 * tail.cutoff, 1.0});
  std::function<double(double)> model;
  if (tail.kind != TailModel::Kind::NumericOnly)
    model = [tail](double u) { return tail.value(u); };
  auto cache = std::make_shared<CachedAntiderivative>(f, a, top, model);
  RealFn F = [cache](double u) { return (*cache)(u); };
  return make_from_functions(std::move(f), std::move(F), a, tail, expr);
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Fails: return "fails";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

KoResult keller_osserman(const Nonlinearity& nl) {
  KoResult out;
  const double lo = nl.a() + 1.0;
  auto integrand = [&nl](double t) {
    const double Fv = nl.F(t);
    return Fv > 0.0 ? 1.0 / std::sqrt(Fv) : std::numeric_limits<double>::infinity();
  };

  const TailModel& tail = nl.tail();
  switch (tail.kind) {
    case TailModel::Kind::PowerLaw: {
      const double e = 0.5 * tail.exponent_or_rate;
      if (e <= 1.0) {
        out.verdict = Verdict::Fails;
        out.tail_integral = std::numeric_limits<double>::infinity();
        return out;
      }
      auto r = integrate_tail(integrand, lo,
                              IntegrandTail::power(e, tail.cutoff,
                                                   std::max(5.0 * tail.validation_tol, 1e-9)));
      out.verdict = Verdict::Holds;
      out.tail_integral = r.value;
      return out;
    }
    case TailModel::Kind::Exponential: {
      auto r = integrate_tail(
          integrand, lo,
          IntegrandTail::exponential(0.5 * tail.exponent_or_rate, tail.cutoff,
                                     std::max(5.0 * tail.validation_tol, 1e-9)));
      out.verdict = Verdict::Holds;
      out.tail_integral = r.value;
      return out;
    }
    case TailModel::Kind::NumericOnly: {
      auto r = integrate_tail(integrand, lo, IntegrandTail::sampled(tail.cutoff));
      if (r.status == TailStatus::Finite) {
        out.verdict = Verdict::Holds;
        out.tail_integral = r.value;
      } else {
        out.verdict = Verdict::Inconclusive;
        out.tail_integral = std::numeric_limits<double>::quiet_NaN();
      }
      return out;
    }
  }
  return out;
}

Verdict ko2_check(const Nonlinearity& nl, const TailModel& reflected_tail) {
  // Antiderivative of the reflected nonlinearity, based at 0.
  auto g = [&nl](double s) { return nl.f(-s); };
  const double top = std::max({10.0, 8.0 * reflected_tail.cutoff});
  std::function<double(double)> model;
  if (reflected_tail.kind != TailModel::Kind::NumericOnly)
    model = [reflected_tail](double u) { return reflected_tail.value(u); };
  CachedAntiderivative G(g, 0.0, top, model);

  for (double mult : {1.0, 2.0, 4.0}) {
    double u = reflected_tail.cutoff * mult;
    if (reflected_tail.kind == TailModel::Kind::Exponential)
      u = reflected_tail.cutoff +
          (mult - 1.0) * 2.0 / reflected_tail.exponent_or_rate;
    const double mv = reflected_tail.value(u);
    if (std::isnan(mv)) break;
    const double got = G(u);
    if (!(got > 0.0))
      throw std::invalid_argument(
          "ko2_check: reflected antiderivative is not positive at u = " +
          std::to_string(u));
    if (std::abs(got / mv - 1.0) > reflected_tail.validation_tol)
      throw std::invalid_argument(
          "ko2_check: reflected antiderivative deviates from its tail model");
  }

  switch (reflected_tail.kind) {
    case TailModel::Kind::PowerLaw:
      // integral of 1/sqrt(G) diverges iff G grows no faster than t^2
      return reflected_tail.exponent_or_rate <= 2.0 ? Verdict::Holds
                                                    : Verdict::Fails;
    case TailModel::Kind::Exponential:
      return Verdict::Fails;
    case TailModel::Kind::NumericOnly: {
      auto integrand = [&G](double t) {
        const double v = G(t);
        return v > 0.0 ? 1.0 / std::sqrt(v)
                       : std::numeric_limits<double>::infinity();
      };
      auto r = integrate_tail(integrand, std::max(1.0, reflected_tail.cutoff),
                              IntegrandTail::sampled(reflected_tail.cutoff));
      return r.status == TailStatus::Finite ? Verdict::Fails
                                            : Verdict::Inconclusive;
    }
  }
  return Verdict::Inconclusive;
}

GEvaluator::GEvaluator(const Nonlinearity& nl, double base)
    : nl_(nl), base_(base) {
  auto integrand = [nl](double t) { return nl.sqrt2F(t); };
  const TailModel& tail = nl.tail();
  const double top = std::min(
      nl.huge_u(),
      std::max({base + 10.0, 100.0 * tail.cutoff, 1e4 * std::max(1.0, base)}));
  std::function<double(double)> model;
  if (tail.kind == TailModel::Kind::PowerLaw) {
    const double c = tail.amplitude, s = tail.exponent_or_rate;
    model = [c, s](double u) {
      return std::sqrt(2.0 * c) * std::pow(u, 0.5 * s + 1.0) / (0.5 * s + 1.0);
    };
  } else if (tail.kind == TailModel::Kind::Exponential) {
    const double c = tail.amplitude, lam = tail.exponent_or_rate;
    model = [c, lam](double u) {
      return std::sqrt(2.0 * c) * (2.0 / lam) * std::exp(0.5 * lam * u);
    };
  }
  cache_ = std::make_shared<CachedAntiderivative>(integrand, base, top, model);
}

double GEvaluator::model_value(double u) const {
  const TailModel& tail = nl_.tail();
  if (tail.kind == TailModel::Kind::PowerLaw) {
    const double c = tail.amplitude, s = tail.exponent_or_rate;
    return std::sqrt(2.0 * c) * std::pow(u, 0.5 * s + 1.0) / (0.5 * s + 1.0);
  }
  if (tail.kind == TailModel::Kind::Exponential) {
    const double c = tail.amplitude, lam = tail.exponent_or_rate;
    return std::sqrt(2.0 * c) * (2.0 / lam) * std::exp(0.5 * lam * u);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

GEvaluator antiderivative_G(const Nonlinearity& nl) {
  return GEvaluator(nl, nl.a());
}

}  // namespace blowup
