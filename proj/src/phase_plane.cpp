#include "blowup/phase_plane.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace blowup {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using State2 = std::array<double, 2>;

// Dormand-Prince 5(4) pair.
struct Dp45 {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                          c5 = 8.0 / 9;
  template <class Rhs>
  static void stages(const Rhs& rhs, double x, const State2& y, double h,
                     const State2& k1, State2 k[7], State2& y5, State2& err) {
    k[0] = k1;
    auto at = [&](double frac, const State2& yy) { return rhs(x + frac * h, yy); };
    State2 t;
    t = {y[0] + h * (1.0 / 5 * k[0][0]), y[1] + h * (1.0 / 5 * k[0][1])};
    k[1] = at(c2, t);
    t = {y[0] + h * (3.0 / 40 * k[0][0] + 9.0 / 40 * k[1][0]),
         y[1] + h * (3.0 / 40 * k[0][1] + 9.0 / 40 * k[1][1])};
    k[2] = at(c3, t);
    t = {y[0] + h * (44.0 / 45 * k[0][0] - 56.0 / 15 * k[1][0] + 32.0 / 9 * k[2][0]),
         y[1] + h * (44.0 / 45 * k[0][1] - 56.0 / 15 * k[1][1] + 32.0 / 9 * k[2][1])};
    k[3] = at(c4, t);
    t = {y[0] + h * (19372.0 / 6561 * k[0][0] - 25360.0 / 2187 * k[1][0] +
                     64448.0 / 6561 * k[2][0] - 212.0 / 729 * k[3][0]),
         y[1] + h * (19372.0 / 6561 * k[0][1] - 25360.0 / 2187 * k[1][1] +
                     64448.0 / 6561 * k[2][1] - 212.0 / 729 * k[3][1])};
    k[4] = at(c5, t);
    t = {y[0] + h * (9017.0 / 3168 * k[0][0] - 355.0 / 33 * k[1][0] +
                     46732.0 / 5247 * k[2][0] + 49.0 / 176 * k[3][0] -
                     5103.0 / 18656 * k[4][0]),
         y[1] + h * (9017.0 / 3168 * k[0][1] - 355.0 / 33 * k[1][1] +
                     46732.0 / 5247 * k[2][1] + 49.0 / 176 * k[3][1] -
                     5103.0 / 18656 * k[4][1])};
    k[5] = at(1.0, t);
    for (int i = 0; i < 2; ++i)
      y5[i] = y[i] + h * (35.0 / 384 * k[0][i] + 500.0 / 1113 * k[2][i] +
                          125.0 / 192 * k[3][i] - 2187.0 / 6784 * k[4][i] +
                          11.0 / 84 * k[5][i]);
    k[6] = at(1.0, y5);
    for (int i = 0; i < 2; ++i) {
      const double y4 = y[i] + h * (5179.0 / 57600 * k[0][i] +
                                    7571.0 / 16695 * k[2][i] +
                                    393.0 / 640 * k[3][i] -
                                    92097.0 / 339200 * k[4][i] +
                                    187.0 / 2100 * k[5][i] + 1.0 / 40 * k[6][i]);
      err[i] = y5[i] - y4;
    }
  }
};

struct StepControl {
  double rtol = 1e-11;
  State2 atol{1e-14, 1e-14};
  double max_factor = 5.0, min_factor = 0.2, safety = 0.9;
};

// Integrates y' = rhs(x, y) from x0, calling observe(x, y, dy) after every
// accepted step (including the initial state) and stopping when stop(x, y)
// returns true or x reaches x_end.
template <class Rhs, class Observe, class Stop>
void integrate_adaptive(const Rhs& rhs, double x0, State2 y0, double x_end,
                        double h0, const StepControl& ctl,
                        const Observe& observe, const Stop& stop) {
  double x = x0;
  State2 y = y0;
  State2 k1 = rhs(x, y);
  observe(x, y, k1);
  double h = h0;
  long steps = 0;
  while (x < x_end) {
    if (++steps > 2000000)
      throw std::runtime_error("integrate_adaptive: step budget exhausted");
    h = std::min(h, x_end - x);
    State2 k[7], y5, err;
    Dp45::stages(rhs, x, y, h, k1, k, y5, err);
    double en = 0.0;
    for (int i = 0; i < 2; ++i)
      en = std::max(en, std::abs(err[i]) /
                            (ctl.atol[i] + ctl.rtol * std::max(std::abs(y[i]),
                                                               std::abs(y5[i]))));
    if (en <= 1.0) {
      x += h;
      y = y5;
      k1 = k[6];  // FSAL
      observe(x, y, k1);
      if (stop(x, y)) return;
    }
    const double factor =
        en > 0 ? ctl.safety * std::pow(en, -0.2) : ctl.max_factor;
    h *= std::clamp(factor, ctl.min_factor, ctl.max_factor);
    if (!(h > 0) || x + h == x)
      throw std::runtime_error("integrate_adaptive: step size underflow");
  }
}

// Closed-form models of int_u^inf G_model (2F)^{-3/2} and int_u^inf
// (2F)^{-3/2}, used for the frozen-tail stopping estimate.
struct TailErrorModel {
  const TailModel* tail;
  int nu;  // N - 1

  double operator()(double u) const {
    if (nu == 0) return 0.0;
    const double c = tail->amplitude;
    if (tail->kind == TailModel::Kind::PowerLaw) {
      const double s = tail->exponent_or_rate;
      if (1.5 * s - 1.0 <= 0.0 || s <= 2.0) return kInf;
      const double kG = std::sqrt(2.0 * c) / (0.5 * s + 1.0);
      const double c32 = std::pow(2.0 * c, -1.5);
      const double I1 = kG * c32 * std::pow(u, 2.0 - s) / (s - 2.0);
      const double Gm = kG * std::pow(u, 0.5 * s + 1.0);
      const double I2 = c32 * std::pow(u, 1.0 - 1.5 * s) / (1.5 * s - 1.0);
      return nu * std::max(I1 - Gm * I2, 0.0);
    }
    if (tail->kind == TailModel::Kind::Exponential) {
      const double lam = tail->exponent_or_rate;
      const double Gm = std::sqrt(2.0 * c) * (2.0 / lam) * std::exp(0.5 * lam * u);
      const double c32 = std::pow(2.0 * c, -1.5);
      const double I1 =
          std::sqrt(2.0 * c) * (2.0 / lam) * c32 * std::exp(-lam * u) / lam;
      const double I2 = c32 * (2.0 / (3.0 * lam)) * std::exp(-1.5 * lam * u);
      return nu * std::max(I1 - Gm * I2, 0.0);
    }
    return kInf;  // no analytic model: caller must integrate to u_stop
  }
};

double hermite_eval(double x0, double y0, double d0, double x1, double y1,
                    double d1, double x) {
  const double h = x1 - x0;
  const double t = (x - x0) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 +
         (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * d1;
}

}  // namespace

size_t PhasePath::segment(double uu) const {
  if (uu < u.front() || uu > u.back()) {
    std::ostringstream msg;
    msg << "PhasePath: query u = " << uu << " outside sampled range ["
        << u.front() << ", " << u.back() << "]";
    throw std::out_of_range(msg.str());
  }
  size_t i = std::upper_bound(u.begin(), u.end(), uu) - u.begin();
  if (i == 0) i = 1;
  if (i >= u.size()) i = u.size() - 1;
  return i - 1;
}

double PhasePath::g_at(double uu) const {
  const size_t k = segment(uu);
  return hermite_eval(u[k], g[k], dg[k], u[k + 1], g[k + 1], dg[k + 1], uu);
}

double PhasePath::r_at(double uu) const {
  const size_t k = segment(uu);
  return hermite_eval(u[k], r[k], dr[k], u[k + 1], r[k + 1], dr[k + 1], uu);
}

double PhasePath::v_at(double uu) const {
  const double rad = nl.F(uu) - g_at(uu);
  if (!(rad > 0.0))
    throw std::runtime_error("PhasePath: F - g vanished inside the range");
  return std::sqrt(2.0 * rad);
}

double PhasePath::tail_distance(double uu) const {
  const Nonlinearity& n = nl;
  if (uu >= u_drop_) {
    auto inv_v0 = [&n](double t) { return 1.0 / n.sqrt2F(t); };
    IntegrandTail desc = n.inv_sqrt_2F_tail();
    desc.cutoff = std::max(desc.cutoff, uu);
    return integrate_tail(inv_v0, uu, desc).value;
  }
  const double ge = frozen_g_;
  auto inv_v = [&n, ge](double t) {
    return 1.0 / std::sqrt(2.0 * (n.F(t) - ge));
  };
  return tail_beyond_drop_ +
         integrate_finite(inv_v, uu, u_drop_, {1e-13, 1e-300, 40000});
}

double PhasePath::surface_distance(double uu) const {
  if (uu >= u.back()) return tail_distance(uu);
  const size_t k = segment(uu);
  auto inv_v = [this](double t) { return 1.0 / v_at(t); };
  return S_[k + 1] + integrate_finite(inv_v, uu, u[k + 1], {1e-13, 1e-300, 4000});
}

double PhasePath::u_at_distance(double d) const {
  if (!(d > 0.0))
    throw std::invalid_argument("PhasePath: distance must be positive");
  if (d > S_.front())
    throw std::out_of_range("PhasePath: distance precedes the sampled range");
  if (d <= S_.back()) {
    // frozen-g region past the samples
    auto Sfn = [this](double t) { return tail_distance(t); };
    double hi = u.back();
    int guard = 0;
    while (tail_distance(hi) > d && ++guard < 500) hi *= 2.0;
    return invert_monotone(Sfn, d, u.back(), hi, 1e-12 * d);
  }
  size_t lo = 0, hi = S_.size() - 1;
  while (hi - lo > 1) {  // S_ is decreasing in the sample index
    const size_t mid = (lo + hi) / 2;
    (S_[mid] >= d ? lo : hi) = mid;
  }
  auto Sfn = [this](double t) { return surface_distance(t); };
  return invert_monotone(Sfn, d, u[lo], u[hi], 1e-12 * d);
}

PhasePath integrate_phase(const Nonlinearity& nl, int N, double u_start,
                          double g_start, double r_start, double u_stop,
                          double tail_error_target) {
  if (N < 1) throw std::invalid_argument("integrate_phase: N must be >= 1");
  if (!(r_start > 0.0))
    throw std::invalid_argument("integrate_phase: r_start must be positive");
  if (!(nl.F(u_start) - g_start > 0.0))
    throw std::runtime_error(
        "profile terminated: F(u_start) - g_start is not positive");
  u_stop = std::min(u_stop, 0.999 * nl.huge_u());
  if (!(u_stop > u_start))
    throw std::invalid_argument("integrate_phase: u_stop <= u_start");

  PhasePath path(nl);
  path.dimension = N;
  const double nu = N - 1;

  auto rhs = [&nl, nu](double uu, const State2& y) -> State2 {
    const double rad = nl.F(uu) - y[0];
    if (!(rad > 0.0))
      throw std::runtime_error(
          "profile terminated: F - g vanished during phase integration");
    const double v = std::sqrt(2.0 * rad);
    return {nu / y[1] * v, 1.0 / v};
  };

  StepControl ctl;
  ctl.atol = {1e-13 * std::max(1.0, nl.F(u_start)), 1e-14};

  TailErrorModel err_model{&nl.tail(), N - 1};
  const double cutoff = nl.tail().cutoff;
  int since_check = 0;
  auto stop = [&](double uu, const State2& y) {
    (void)y;
    if (tail_error_target <= 0.0) return false;
    if (uu < 4.0 * std::abs(u_start) + 1.0 || uu < 2.0 * cutoff) return false;
    if (++since_check < 16) return false;
    since_check = 0;
    return err_model(uu) < tail_error_target;
  };
  auto observe = [&path](double uu, const State2& y, const State2& dy) {
    path.u.push_back(uu);
    path.g.push_back(y[0]);
    path.r.push_back(y[1]);
    path.dg.push_back(dy[0]);
    path.dr.push_back(dy[1]);
  };

  const double h0 = 1e-4 * std::max(std::abs(u_start), 1.0);
  integrate_adaptive(rhs, u_start, {g_start, r_start}, u_stop, h0, ctl,
                     observe, stop);

  // Frozen-g tail: integral of 1/sqrt(2(F - g_end)) past the last sample,
  // with g dropped once F dwarfs it.
  const double u_end = path.u.back();
  const double g_end = path.g.back();
  double u_drop = u_end;
  {
    const TailModel& t = nl.tail();
    const double target_F = std::max({1e12 * std::abs(g_end), 100.0 * nl.F(u_end), 1.0});
    if (t.kind == TailModel::Kind::PowerLaw)
      u_drop = std::pow(target_F / t.amplitude, 1.0 / t.exponent_or_rate);
    else if (t.kind == TailModel::Kind::Exponential)
      u_drop = std::log(target_F / t.amplitude) / t.exponent_or_rate;
    else {
      u_drop = u_end;
      for (int i = 0; i < 200 && nl.F(u_drop) < target_F; ++i) u_drop *= 2.0;
    }
    u_drop = std::min(std::max(u_drop, u_end), nl.huge_u());
  }
  auto inv_v_frozen = [&nl, g_end](double t) {
    return 1.0 / std::sqrt(2.0 * (nl.F(t) - g_end));
  };
  auto inv_v0 = [&nl](double t) { return 1.0 / nl.sqrt2F(t); };
  IntegrandTail desc = nl.inv_sqrt_2F_tail();
  desc.cutoff = std::max(desc.cutoff, u_drop);
  path.frozen_g_ = g_end;
  path.u_drop_ = u_drop;
  path.tail_beyond_drop_ = integrate_tail(inv_v0, u_drop, desc).value;
  path.tail_beyond_stop =
      integrate_finite(inv_v_frozen, u_end, u_drop, {1e-13, 1e-300, 40000}) +
      path.tail_beyond_drop_;
  path.blowup_radius = path.r.back() + path.tail_beyond_stop;

  // cumulative distance to the surface at the samples
  const size_t n = path.u.size();
  path.S_.assign(n, 0.0);
  path.S_[n - 1] = path.tail_beyond_stop;
  for (size_t i = n - 1; i-- > 0;) {
    auto inv_v = [&path](double t) { return 1.0 / path.v_at(t); };
    path.S_[i] = path.S_[i + 1] + integrate_finite(inv_v, path.u[i],
                                                   path.u[i + 1],
                                                   {1e-13, 1e-300, 4000});
  }
  return path;
}

namespace {

struct ShotResult {
  double radius = kInf;
  bool ok = false;
};

struct InnerRun {
  std::vector<double> r, u, w;
  double r_sw = 0, u_sw = 0, g_sw = 0;
  bool reached = false;
};

InnerRun run_inner(const Nonlinearity& nl, int N, double u_c, double U_sw,
                   bool keep_samples) {
  InnerRun out;
  const double nu = N - 1;
  const double fc = nl.f(u_c);
  if (!(fc > 0.0))
    throw std::invalid_argument(
        "solve_large_solution: f is not positive at the center value");

  auto rhs = [&nl, nu](double rr, const State2& y) -> State2 {
    return {y[1], nl.f(y[0]) - nu * y[1] / rr};
  };
  StepControl ctl;
  ctl.atol = {1e-12 * std::max(1.0, std::abs(u_c)), 1e-12 * std::max(1.0, fc)};

  const double r0 = 1e-8;
  State2 y0{u_c + fc * r0 * r0 / (2.0 * N), fc * r0 / N};

  bool reached = false;
  auto stop = [&](double rr, const State2& y) {
    (void)rr;
    if (y[0] >= U_sw) {
      reached = true;
      return true;
    }
    return false;
  };
  auto observe = [&](double rr, const State2& y, const State2& dy) {
    (void)dy;
    if (keep_samples) {
      out.r.push_back(rr);
      out.u.push_back(y[0]);
      out.w.push_back(y[1]);
    }
    out.r_sw = rr;
    out.u_sw = y[0];
    out.g_sw = nl.F(y[0]) - 0.5 * y[1] * y[1];
  };
  integrate_adaptive(rhs, r0, y0, 40.0, 1e-4, ctl, observe, stop);
  out.reached = reached;
  return out;
}

}  // namespace

RadialSolution solve_large_solution(const Nonlinearity& nl, int N,
                                    double tol_radius) {
  if (N < 1)
    throw std::invalid_argument("solve_large_solution: N must be >= 1");
  if (!keller_osserman(nl).holds())
    throw std::invalid_argument(
        "solve_large_solution: the blow-up existence condition fails or is "
        "inconclusive");

  const double tail_target = std::min(1e-13, 1e-3 * tol_radius);
  std::vector<std::pair<double, double>> history;

  auto radius_of = [&](double u_c) -> double {
    const double Ftarget = 1e4 * std::max(1.0, nl.F(u_c));
    auto Ffn = [&nl](double t) { return nl.F(t); };
    const double U_sw =
        invert_monotone(Ffn, Ftarget, std::max(u_c, nl.a()) + 1.0,
                        std::max(2.0 * std::abs(u_c), 10.0), 1e-6 * Ftarget);
    InnerRun inner = run_inner(nl, N, u_c, U_sw, false);
    if (!inner.reached) return kInf;
    PhasePath p = integrate_phase(nl, N, inner.u_sw, inner.g_sw, inner.r_sw,
                                  nl.huge_u(), tail_target);
    history.emplace_back(u_c, p.blowup_radius);
    return p.blowup_radius;
  };

  // Bracket the center value: the blow-up radius decreases in u_c.
  double lo = std::max(nl.a(), 0.0) + 1.0;
  double R_lo = radius_of(lo);
  int guard = 0;
  while (R_lo < 1.0) {
    lo = nl.a() + 0.5 * (lo - nl.a());
    if (++guard > 60 || !(lo > nl.a()))
      throw std::runtime_error(
          "solve_large_solution: no center value with blow-up radius above 1");
    R_lo = radius_of(lo);
  }
  double hi = 2.0 * std::max(lo, 1.0);
  double R_hi = radius_of(hi);
  guard = 0;
  while (!(R_hi < 1.0)) {
    hi *= 2.0;
    if (++guard > 60)
      throw std::runtime_error(
          "solve_large_solution: no center value with blow-up radius below 1");
    R_hi = radius_of(hi);
  }

  // Secant/bisection hybrid on radius(u_c) = 1.
  double best_uc = lo, best_gap = std::abs(R_lo - 1.0);
  for (int it = 0; it < 120 && best_gap > tol_radius; ++it) {
    double mid;
    if (it % 2 == 0 && std::isfinite(R_lo) && std::isfinite(R_hi) &&
        R_lo != R_hi) {
      mid = lo + (1.0 - R_lo) * (hi - lo) / (R_hi - R_lo);
      const double margin = 1e-3 * (hi - lo);
      if (!(mid > lo + margin && mid < hi - margin)) mid = 0.5 * (lo + hi);
    } else {
      mid = 0.5 * (lo + hi);
    }
    const double R = radius_of(mid);
    if (std::abs(R - 1.0) < best_gap) {
      best_gap = std::abs(R - 1.0);
      best_uc = mid;
    }
    if (R > 1.0) {
      lo = mid;
      R_lo = R;
    } else {
      hi = mid;
      R_hi = R;
    }
    if (hi - lo < 1e-15 * std::max(1.0, hi)) break;
  }
  if (best_gap > tol_radius)
    throw std::runtime_error(
        "solve_large_solution: shooting did not reach the radius tolerance");

  // Final assembly at the accepted center value.
  RadialSolution sol(nl);
  const double u_c = best_uc;
  const double Ftarget = 1e4 * std::max(1.0, nl.F(u_c));
  auto Ffn = [&nl](double t) { return nl.F(t); };
  const double U_sw =
      invert_monotone(Ffn, Ftarget, std::max(u_c, nl.a()) + 1.0,
                      std::max(2.0 * std::abs(u_c), 10.0), 1e-6 * Ftarget);
  InnerRun inner = run_inner(nl, N, u_c, U_sw, true);
  sol.center_value = u_c;
  sol.inner_r = std::move(inner.r);
  sol.inner_u = std::move(inner.u);
  sol.inner_v = std::move(inner.w);
  sol.path = integrate_phase(nl, N, inner.u_sw, inner.g_sw, inner.r_sw,
                             nl.huge_u(), tail_target);
  sol.raw_blowup_radius = sol.path.blowup_radius;
  sol.shooting_history = std::move(history);

  // Overlap segment: continue the r-integration past the hand-off so the two
  // parameterizations can be compared on a common window.
  {
    const double nu = N - 1;
    auto rhs = [&nl, nu](double rr, const State2& y) -> State2 {
      return {y[1], nl.f(y[0]) - nu * y[1] / rr};
    };
    StepControl ctl;
    ctl.atol = {1e-12 * std::max(1.0, U_sw), 1e-12};
    const size_t last = sol.inner_r.size() - 1;
    auto observe = [&](double rr, const State2& y, const State2&) {
      sol.overlap_r.push_back(rr);
      sol.overlap_u.push_back(y[0]);
    };
    auto stop = [&](double, const State2& y) { return y[0] >= 1.6 * U_sw; };
    integrate_adaptive(rhs, sol.inner_r[last],
                       {sol.inner_u[last], sol.inner_v[last]}, 40.0, 1e-6, ctl,
                       observe, stop);
  }
  return sol;
}

double RadialSolution::u_at(double r) const {
  if (!(r > 0.0 && r < 1.0))
    throw std::invalid_argument("RadialSolution: r must lie in (0, 1)");
  const double d = (1.0 - r) * raw_blowup_radius;
  const double r_orig = raw_blowup_radius - d;
  if (r_orig >= path.r.front()) return path.u_at_distance(d);
  // before the phase hand-off: interpolate the center segment, whose exact
  // slopes du/dr are stored
  if (inner_r.empty() || r_orig < inner_r.front())
    throw std::out_of_range("RadialSolution: radius precedes the profile");
  const size_t i =
      std::upper_bound(inner_r.begin(), inner_r.end(), r_orig) -
      inner_r.begin();
  const size_t k = std::min(std::max<size_t>(i, 1), inner_r.size() - 1);
  return hermite_eval(inner_r[k - 1], inner_u[k - 1], inner_v[k - 1],
                      inner_r[k], inner_u[k], inner_v[k], r_orig);
}

double RadialSolution::distance_of(double u) const {
  return path.surface_distance(u) / raw_blowup_radius;
}

RealFn error_term(const RadialSolution& sol) {
  auto p = std::make_shared<PhasePath>(sol.path);
  return [p](double u) { return p->g_at(u); };
}

EnergyProfile::EnergyProfile(Nonlinearity nl, double C) : nl_(nl), C_(C) {
  double lo;
  if (C > 0.0) {
    lo = nl.a() + 1e-9 * std::max(1.0, std::abs(nl.a()));
  } else if (C == 0.0) {
    lo = nl.a() + 1e-7 * std::max(1.0, std::abs(nl.a()));
  } else {
    auto Ffn = [&nl](double t) { return nl.F(t); };
    lo = invert_monotone(Ffn, -C, nl.a(), nl.huge_u(), 1e-12 * std::abs(C));
    lo += 1e-7 * std::max(1.0, std::abs(lo));
  }
  auto h = [nl, C](double t) {
    const double rad = nl.F(t) + C;
    return rad > 0.0 ? 1.0 / std::sqrt(2.0 * rad) : kInf;
  };
  IntegrandTail tail = nl.inv_sqrt_2F_tail();
  // push the closed-form attachment out to where the offset is invisible
  const TailModel& tm = nl.tail();
  double drop = tail.cutoff;
  const double targF = 1e12 * std::max(std::abs(C), 1e-300);
  if (tm.kind == TailModel::Kind::PowerLaw)
    drop = std::pow(targF / tm.amplitude, 1.0 / tm.exponent_or_rate);
  else if (tm.kind == TailModel::Kind::Exponential)
    drop = std::log(std::max(targF / tm.amplitude, 2.0)) / tm.exponent_or_rate;
  tail.cutoff = std::min(std::max(tail.cutoff, drop), 0.5 * nl.huge_u());

  const double top =
      std::min(nl.huge_u(), std::max({1e6, 100.0 * tail.cutoff, 100.0 * (std::abs(lo) + 1.0)}));
  S_ = std::make_shared<UpperTailIntegral>(h, lo, top, tail);
}

double EnergyProfile::S(double u) const { return (*S_)(u); }

double EnergyProfile::u_at(double r) const {
  if (!(r > 0.0 && r < 1.0))
    throw std::invalid_argument("EnergyProfile: r must lie in (0, 1)");
  const double d = 1.0 - r;
  if (d > S(S_->lo()))
    throw std::out_of_range(
        "EnergyProfile: requested radius precedes the profile domain");
  auto fn = [this](double u) { return S(u); };
  return invert_monotone(fn, d, S_->lo(), 0.9 * nl_.huge_u(), 1e-12 * d);
}

PairGapReport pair_gap_estimates(const Nonlinearity& nl,
                                 const EnergyProfile& p1,
                                 const EnergyProfile& p2,
                                 std::span<const double> rs) {
  const double C1 = p1.energy_offset(), C2 = p2.energy_offset();
  // The surface-distance difference of the two profiles at a common height,
  // as a single integral of the rearranged integrand
  //   1/sqrt(2(F+C1)) - 1/sqrt(2(F+C2)) = 2(C2-C1)/(A B (A+B)),
  // which stays fully conditioned long after the direct subtraction of the
  // two distances has fallen below machine resolution.
  auto dS_fn = [&nl, C1, C2](double u) -> double {
    if (C1 == C2) return 0.0;
    auto h = [&nl, C1, C2](double t) {
      const double F2 = 2.0 * nl.F(t);
      const double A = std::sqrt(F2 + 2.0 * C1);
      const double B = std::sqrt(F2 + 2.0 * C2);
      return 2.0 * (C2 - C1) / (A * B * (A + B));
    };
    const TailModel& tm = nl.tail();
    IntegrandTail desc =
        tm.kind == TailModel::Kind::Exponential
            ? IntegrandTail::exponential(1.5 * tm.exponent_or_rate, tm.cutoff,
                                         1e-6)
            : IntegrandTail::power(1.5 * tm.exponent_or_rate, tm.cutoff, 1e-6);
    desc.cutoff = std::max(desc.cutoff, u);
    return integrate_tail(h, u, desc).value;
  };

  PairGapReport rep;
  for (double r : rs) {
    const double u1 = p1.u_at(r);
    // first-order inversion of the matching condition S2(u2) = S1(u1);
    // the neglected term is of size dS^2 * v2'
    const double dS = dS_fn(u1);
    const double v2u1 = std::sqrt(2.0 * (nl.F(u1) + C2));
    const double u2 = u1 - dS * v2u1;
    const double gap = std::abs(dS) * v2u1;

    auto invF = [&nl](double t) { return 1.0 / nl.F(t); };
    const double tailF =
        integrate_tail(invF, std::min(u1, u2), nl.inv_F_tail()).value;
    rep.r.push_back(r);
    rep.u1.push_back(u1);
    rep.u2.push_back(u2);
    rep.gap.push_back(gap);
    rep.f_gap.push_back(nl.f(0.5 * (u1 + u2)) * gap);
    rep.tail_inv_F.push_back(tailF);
    rep.fitted_C.push_back(gap / tailF);
  }
  return rep;
}

}  // namespace blowup
