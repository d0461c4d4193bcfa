#include "blowup/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace blowup {

namespace {

struct GkEstimate {
  double value;
  double error;
};

// 15-point Kronrod extension of 7-point Gauss. Nodes/weights on [-1, 1],
// positive half; Gauss points sit at odd indices plus the centre.
GkEstimate gk15(const RealFn& g, double lo, double hi) {
  static const double xk[7] = {
      0.991455371120813, 0.949107912342759, 0.864864423359769,
      0.741531185599394, 0.586087235467691, 0.405845151377397,
      0.207784955007898};
  static const double wk[8] = {
      0.022935322010529, 0.063092092629979, 0.104790010322250,
      0.140653259715525, 0.169004726639267, 0.190350578064785,
      0.204432940075298, 0.209482141084728};
  static const double wg[4] = {
      0.129484966168870, 0.279705391489277, 0.381830050505119,
      0.417959183673469};

  const double c = 0.5 * (lo + hi);
  const double h = 0.5 * (hi - lo);
  const double fc = g(c);
  double resk = wk[7] * fc;
  double resg = wg[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const double fi = g(c + h * xk[i]) + g(c - h * xk[i]);
    resk += wk[i] * fi;
    if (i % 2 == 1) resg += wg[i / 2] * fi;
  }
  resk *= h;
  resg *= h;
  return {resk, std::abs(resk - resg)};
}

struct Piece {
  double error;
  double value;
  double lo, hi;
  bool splittable;
  bool operator<(const Piece& o) const { return error < o.error; }
};

bool too_narrow(double lo, double hi) {
  const double scale = std::abs(lo) + std::abs(hi) + 1e-300;
  return hi - lo <= 8.0 * std::numeric_limits<double>::epsilon() * scale;
}

}  // namespace

double integrate_finite(const RealFn& g, double lo, double hi,
                        const QuadratureSpec& spec) {
  if (!(lo <= hi)) throw std::invalid_argument("integrate_finite: lo > hi");
  if (lo == hi) return 0.0;

  // Non-finite probes mark a piece for immediate splitting; once a piece
  // containing the bad point narrows to machine width its contribution is
  // dropped (negligible for an integrable singularity). Genuinely divergent
  // integrands keep splitting until the budget reports the hot interval.
  constexpr double kBadPieceError = 1e250;
  auto account = [&](double a, double b) -> Piece {
    GkEstimate e = gk15(g, a, b);
    if (too_narrow(a, b))
      return {0.0, std::isfinite(e.value) ? e.value : 0.0, a, b, false};
    if (!std::isfinite(e.value)) return {kBadPieceError, 0.0, a, b, true};
    return {e.error, e.value, a, b, true};
  };

  std::priority_queue<Piece> heap;
  heap.push(account(lo, hi));
  double total = heap.top().value;
  double total_err = heap.top().error;
  int used = 0;
  while (total_err > std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) {
    Piece worst = heap.top();
    if (!worst.splittable) break;
    if (++used > spec.max_subdivisions) {
      std::ostringstream msg;
      msg << "integrate_finite: subdivision budget exhausted; worst interval ["
          << worst.lo << ", " << worst.hi << "] holds error " << worst.error
          << " of total " << total_err;
      throw std::runtime_error(msg.str());
    }
    heap.pop();
    total -= worst.value;
    total_err -= worst.error;
    const double mid = 0.5 * (worst.lo + worst.hi);
    Piece l = account(worst.lo, mid);
    Piece r = account(mid, worst.hi);
    total += l.value + r.value;
    total_err += l.error + r.error;
    heap.push(l);
    heap.push(r);
  }
  return total;
}

IntegrandTail IntegrandTail::power(double exponent, double cutoff,
                                   double validate_tol) {
  IntegrandTail t;
  t.kind = TailKind::Power;
  t.exponent = exponent;
  t.cutoff = cutoff;
  t.validate_tol = validate_tol;
  return t;
}

IntegrandTail IntegrandTail::exponential(double rate, double cutoff,
                                         double validate_tol) {
  IntegrandTail t;
  t.kind = TailKind::Exponential;
  t.rate = rate;
  t.cutoff = cutoff;
  t.validate_tol = validate_tol;
  return t;
}

IntegrandTail IntegrandTail::decay_probe(double cutoff) {
  IntegrandTail t;
  t.kind = TailKind::DecayProbe;
  t.cutoff = cutoff;
  return t;
}

IntegrandTail IntegrandTail::sampled(double cutoff) {
  IntegrandTail t;
  t.kind = TailKind::Sampled;
  t.cutoff = cutoff;
  return t;
}

namespace {

constexpr double kHugeArg = 1e150;

// Relative mismatch between g and the fitted model at x.
double power_mismatch(const RealFn& g, double amp, double e, double x) {
  const double model = amp * std::pow(x, -e);
  const double got = g(x);
  if (model == 0.0) return std::abs(got) > 0 ? 1.0 : 0.0;
  return std::abs(got / model - 1.0);
}

double exp_mismatch(const RealFn& g, double amp, double rate, double x0,
                    double x) {
  // amplitude carried relative to x0 to avoid overflow in exp(rate*x)
  const double model = amp * std::exp(-rate * (x - x0));
  const double got = g(x);
  if (model == 0.0) return std::abs(got) > 0 ? 1.0 : 0.0;
  return std::abs(got / model - 1.0);
}

}  // namespace

TailIntegral integrate_tail(const RealFn& g, double lo,
                            const IntegrandTail& tail,
                            const QuadratureSpec& spec) {
  TailIntegral out;

  switch (tail.kind) {
    case TailKind::Power: {
      if (tail.exponent <= 1.0) {
        out.status = TailStatus::Infinite;
        out.value = std::numeric_limits<double>::infinity();
        return out;
      }
      double c = std::max(lo, tail.cutoff);
      const double e = tail.exponent;
      bool ok = false;
      for (int ext = 0; ext < 80; ++ext) {
        const double gc = g(c);
        if (gc != 0.0) {
          const double amp = gc * std::pow(c, e);
          if (power_mismatch(g, amp, e, 2.0 * c) <= tail.validate_tol &&
              power_mismatch(g, amp, e, 4.0 * c) <= tail.validate_tol) {
            ok = true;
            break;
          }
        }
        if (c > kHugeArg) break;
        c *= 4.0;
      }
      if (!ok)
        throw std::runtime_error(
            "integrate_tail: integrand does not match its power-law tail "
            "description within the validation tolerance");
      const double gc = g(c);
      const double closed = gc * c / (e - 1.0);  // = A c^{1-e}/(e-1)
      out.value = integrate_finite(g, lo, c, spec) + closed;
      out.cutoff_used = c;
      return out;
    }

    case TailKind::Exponential: {
      if (tail.rate <= 0.0)
        throw std::invalid_argument("integrate_tail: rate must be positive");
      double c = std::max(lo, tail.cutoff);
      const double r = tail.rate;
      bool ok = false;
      for (int ext = 0; ext < 80; ++ext) {
        const double gc = g(c);
        if (gc != 0.0) {
          if (exp_mismatch(g, gc, r, c, c + 1.0 / r) <= tail.validate_tol &&
              exp_mismatch(g, gc, r, c, c + 2.0 / r) <= tail.validate_tol) {
            ok = true;
            break;
          }
        }
        if (c > kHugeArg) break;
        c += 4.0 / r;
      }
      if (!ok)
        throw std::runtime_error(
            "integrate_tail: integrand does not match its exponential tail "
            "description within the validation tolerance");
      const double closed = g(c) / r;
      out.value = integrate_finite(g, lo, c, spec) + closed;
      out.cutoff_used = c;
      return out;
    }

    case TailKind::DecayProbe: {
      double c = std::max(lo, tail.cutoff);
      double acc = integrate_finite(g, lo, c, spec);
      for (int ext = 0; ext < 300; ++ext) {
        const double scale = std::max(spec.abs_tol, spec.rel_tol * std::abs(acc));
        if (std::abs(g(c)) * c * 20.0 <= scale) {
          out.value = acc;
          out.cutoff_used = c;
          return out;
        }
        if (c > kHugeArg)
          throw std::runtime_error(
              "integrate_tail: decay probe exhausted its budget before the "
              "integrand became negligible");
        acc += integrate_finite(g, c, 2.0 * c, spec);
        c *= 2.0;
      }
      throw std::runtime_error(
          "integrate_tail: decay probe exhausted its budget");
    }

    case TailKind::Sampled: {
      // Estimate local log-log slopes of |g| on a geometric ladder past the
      // cutoff. Convergence can be asserted only when every observed slope is
      // safely below -1; anything else is inconclusive. The ladder stops
      // early if the evaluator overflows or leaves its domain.
      double c = std::max(lo, tail.cutoff);
      std::vector<double> xs, vals;
      for (int i = 0; i < 12; ++i) {
        const double x = c * std::pow(2.0, i);
        double v;
        try {
          v = std::abs(g(x));
        } catch (...) {
          break;
        }
        if (!std::isfinite(v)) break;
        xs.push_back(x);
        vals.push_back(v);
      }
      double worst_slope = -std::numeric_limits<double>::infinity();
      bool degenerate = xs.size() < 5;
      for (size_t i = 0; !degenerate && i + 1 < xs.size(); ++i) {
        if (vals[i] == 0.0 || vals[i + 1] == 0.0) {
          degenerate = true;
          break;
        }
        const double slope =
            std::log(vals[i + 1] / vals[i]) / std::log(xs[i + 1] / xs[i]);
        worst_slope = std::max(worst_slope, slope);
      }
      if (degenerate || worst_slope > -1.1) {
        out.status = TailStatus::Inconclusive;
        out.value = std::numeric_limits<double>::quiet_NaN();
        return out;
      }
      const double e = -worst_slope;  // conservative: slowest observed decay
      const double last = xs.back();
      const double closed = vals.back() * last / (e - 1.0);
      out.value = integrate_finite(g, lo, last, spec) + closed;
      out.cutoff_used = last;
      return out;
    }
  }
  throw std::logic_error("integrate_tail: unreachable");
}

double invert_monotone(const RealFn& h, double target, double lo, double hi,
                       double tol) {
  if (!(lo < hi))
    throw std::invalid_argument("invert_monotone: empty bracket");

  auto residual = [&](double x) { return h(x) - target; };
  double a = lo, b = hi;
  double fa = residual(a), fb = residual(b);

  // Expand the bracket if the target is not straddled.
  for (int ext = 0; ext < 60 && fa * fb > 0.0; ++ext) {
    const double width = b - a;
    bool moved = false;
    try {
      const double a2 = a - width;
      const double f2 = residual(a2);
      a = a2;
      fa = f2;
      moved = true;
    } catch (...) {
      // left side not evaluable; keep a
    }
    if (fa * fb <= 0.0) break;
    try {
      const double b2 = b + (b - a);
      const double f2 = residual(b2);
      b = b2;
      fb = f2;
      moved = true;
    } catch (...) {
    }
    if (!moved) break;
  }
  if (fa * fb > 0.0)
    throw std::runtime_error(
        "invert_monotone: target not bracketed even after expansion");

  if (std::abs(fa) <= tol) return a;
  if (std::abs(fb) <= tol) return b;

  double best_x = a, best_f = fa;
  for (int it = 0; it < 240; ++it) {
    double x;
    if (it % 2 == 0 && fb != fa) {
      x = a - fa * (b - a) / (fb - fa);  // secant
      const double margin = 1e-3 * (b - a);
      if (!(x > a + margin && x < b - margin)) x = 0.5 * (a + b);
    } else {
      x = 0.5 * (a + b);
    }
    const double fx = residual(x);
    if (std::abs(fx) < std::abs(best_f)) {
      best_x = x;
      best_f = fx;
    }
    if (std::abs(fx) <= tol) return x;
    if ((fa < 0.0) == (fx < 0.0)) {
      a = x;
      fa = fx;
    } else {
      b = x;
      fb = fx;
    }
    const double scale = std::abs(a) + std::abs(b) + 1.0;
    if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * scale) break;
  }
  if (std::abs(best_f) <= tol) return best_x;
  throw std::runtime_error(
      "invert_monotone: bracket collapsed before reaching the residual "
      "tolerance");
}

UpperTailIntegral::UpperTailIntegral(RealFn h, double lo, double ladder_top,
                                     IntegrandTail tail, QuadratureSpec spec)
    : h_(std::move(h)), tail_(tail), spec_(spec) {
  if (!(ladder_top > lo))
    throw std::invalid_argument("UpperTailIntegral: ladder_top <= lo");
  xs_.push_back(lo);
  double step = std::max(1e-6 * std::max(1.0, std::abs(lo)),
                         1e-6 * (ladder_top - lo));
  double x = lo;
  while (x < ladder_top) {
    x = std::min(x + step, ladder_top);
    xs_.push_back(x);
    step *= 2.0;
  }
  const size_t n = xs_.size();
  vals_.assign(n, 0.0);
  TailIntegral top = integrate_tail(h_, xs_.back(), tail_, spec_);
  if (!top.finite())
    throw std::runtime_error(
        "UpperTailIntegral: tail integral is not finite");
  vals_[n - 1] = top.value;
  for (size_t i = n - 1; i-- > 0;)
    vals_[i] = vals_[i + 1] + integrate_finite(h_, xs_[i], xs_[i + 1], spec_);
}

double UpperTailIntegral::operator()(double t) const {
  if (t >= xs_.back()) return integrate_tail(h_, t, tail_, spec_).value;
  if (t < xs_.front())
    return integrate_finite(h_, t, xs_.front(), spec_) + vals_.front();
  const size_t i = std::upper_bound(xs_.begin(), xs_.end(), t) - xs_.begin();
  return vals_[i] + integrate_finite(h_, t, xs_[i], spec_);
}

Interpolant::Interpolant(std::vector<double> xs, std::vector<double> ys,
                         std::vector<double> slopes)
    : xs_(std::move(xs)), ys_(std::move(ys)), slopes_(std::move(slopes)) {
  if (xs_.size() < 2 || xs_.size() != ys_.size() ||
      xs_.size() != slopes_.size())
    throw std::invalid_argument("Interpolant: inconsistent node data");
  for (size_t i = 0; i + 1 < xs_.size(); ++i)
    if (!(xs_[i] < xs_[i + 1]))
      throw std::invalid_argument("Interpolant: xs must strictly increase");
}

double Interpolant::operator()(double x) const {
  size_t i = std::upper_bound(xs_.begin(), xs_.end(), x) - xs_.begin();
  if (i == 0) i = 1;
  if (i >= xs_.size()) i = xs_.size() - 1;
  const size_t k = i - 1;
  const double h = xs_[i] - xs_[k];
  const double t = (x - xs_[k]) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  return h00 * ys_[k] + h10 * h * slopes_[k] + h01 * ys_[i] +
         h11 * h * slopes_[i];
}

double Interpolant::derivative(double x) const {
  size_t i = std::upper_bound(xs_.begin(), xs_.end(), x) - xs_.begin();
  if (i == 0) i = 1;
  if (i >= xs_.size()) i = xs_.size() - 1;
  const size_t k = i - 1;
  const double h = xs_[i] - xs_[k];
  const double t = (x - xs_[k]) / h;
  const double dh00 = (6 * t * t - 6 * t) / h;
  const double dh10 = 3 * t * t - 4 * t + 1;
  const double dh01 = (-6 * t * t + 6 * t) / h;
  const double dh11 = 3 * t * t - 2 * t;
  return dh00 * ys_[k] + dh10 * slopes_[k] + dh01 * ys_[i] + dh11 * slopes_[i];
}

Interpolant monotone_interpolant(std::vector<double> xs,
                                 std::vector<double> ys) {
  const size_t n = xs.size();
  if (n < 2 || ys.size() != n)
    throw std::invalid_argument("monotone_interpolant: need >= 2 nodes");

  bool nondec = true, noninc = true;
  for (size_t i = 0; i + 1 < n; ++i) {
    if (ys[i + 1] < ys[i]) nondec = false;
    if (ys[i + 1] > ys[i]) noninc = false;
  }
  if (!nondec && !noninc)
    throw std::invalid_argument("monotone_interpolant: ys are not monotone");

  std::vector<double> delta(n - 1);
  std::vector<double> h(n - 1);
  for (size_t i = 0; i + 1 < n; ++i) {
    h[i] = xs[i + 1] - xs[i];
    delta[i] = (ys[i + 1] - ys[i]) / h[i];
  }

  std::vector<double> d(n, 0.0);
  // Fritsch-Butland interior slopes: weighted harmonic mean, zero at local
  // extrema. Monotone by construction.
  for (size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) {
      d[i] = 0.0;
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  // One-sided three-point endpoint slopes, clamped to preserve monotonicity.
  auto endpoint = [](double h0, double h1, double d0, double d1) {
    double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (s * d0 <= 0.0)
      s = 0.0;
    else if (d0 * d1 <= 0.0 && std::abs(s) > 3.0 * std::abs(d0))
      s = 3.0 * d0;
    return s;
  };
  if (n == 2) {
    d[0] = d[1] = delta[0];
  } else {
    d[0] = endpoint(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = endpoint(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  }
  return Interpolant(std::move(xs), std::move(ys), std::move(d));
}

Interpolant hermite_interpolant(std::vector<double> xs, std::vector<double> ys,
                                std::vector<double> dys) {
  return Interpolant(std::move(xs), std::move(ys), std::move(dys));
}

LogGrid LogGrid::make(double u0, double umax, double per_decade) {
  if (!(u0 > 0.0) || !(umax > u0))
    throw std::invalid_argument("LogGrid: need 0 < u0 < umax");
  if (!(per_decade >= 2.0))
    throw std::invalid_argument("LogGrid: density must be >= 2 per decade");
  const double decades = std::log10(umax / u0);
  const int n = std::max(2, static_cast<int>(std::ceil(per_decade * decades)) + 1);
  LogGrid g;
  g.density = per_decade;
  g.nodes.resize(n);
  const double ratio = umax / u0;
  for (int i = 0; i < n; ++i)
    g.nodes[i] = u0 * std::pow(ratio, static_cast<double>(i) / (n - 1));
  g.nodes.front() = u0;
  g.nodes.back() = umax;
  return g;
}

}  // namespace blowup
