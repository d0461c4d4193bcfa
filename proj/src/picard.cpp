#include "blowup/picard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace blowup {

namespace {
const QuadratureSpec kCellSpec{1e-13, 1e-300, 4000};
}

double PicardWorkspace::Q(double u) const {
  if (N == 1) return 0.0;
  const double Fv = nl.F(u);
  return (N - 1) * ((*G)(u) - (*G)(U0)) / (2.0 * Fv);
}

double PicardWorkspace::tail_inv_v0(double u) const {
  auto inv_v0 = [this](double t) { return 1.0 / nl.sqrt2F(t); };
  IntegrandTail desc = nl.inv_sqrt_2F_tail();
  desc.cutoff = std::max(desc.cutoff, u);
  return integrate_tail(inv_v0, u, desc).value;
}

double PicardWorkspace::tail_Q_over_v0(double u) const {
  if (N == 1) return 0.0;
  auto h = [this](double t) { return Q(t) / nl.sqrt2F(t); };
  const TailModel& t = nl.tail();
  IntegrandTail desc =
      t.kind == TailModel::Kind::Exponential
          ? IntegrandTail::exponential(t.exponent_or_rate, u, 1e-5)
          : IntegrandTail::power(t.exponent_or_rate - 1.0, u, 1e-5);
  desc.cutoff = std::max(desc.cutoff, u);
  return integrate_tail(h, u, desc).value;
}

double VIterate::w_at(double u) const {
  const double Umax = ws->Umax;
  if (u >= Umax) return 1.0 - tail_coeff * ws->Q(u);
  if (u <= ws->U0) return w.front();
  return w_interp_(std::log(u));
}

double VIterate::v_at(double u) const { return w_at(u) * ws->nl.sqrt2F(u); }

double VIterate::S_at(double u) const {
  const auto& nodes = ws->grid.nodes;
  if (u >= ws->Umax)
    return ws->tail_inv_v0(u) + tail_coeff * ws->tail_Q_over_v0(u);
  if (u < ws->U0 - 1e-9 * ws->U0)
    throw std::out_of_range("VIterate: query below U0");
  const size_t i =
      std::upper_bound(nodes.begin(), nodes.end(), u) - nodes.begin();
  const size_t hi = std::min(i, nodes.size() - 1);
  auto inv_v = [this](double t) { return 1.0 / v_at(t); };
  return S[hi] + integrate_finite(inv_v, u, nodes[hi], kCellSpec);
}

double VIterate::sup_gap(const VIterate& other) const {
  const auto& nodes = ws->grid.nodes;
  double m = 0.0;
  for (size_t i = 0; i < nodes.size(); ++i) {
    m = std::max(m, std::abs(w[i] - other.w[i]));
    if (i + 1 < nodes.size()) {
      for (double frac : {0.2, 0.4, 0.6, 0.8}) {
        const double u = nodes[i] * std::pow(nodes[i + 1] / nodes[i], frac);
        m = std::max(m, std::abs(w_at(u) - other.w_at(u)));
      }
    }
  }
  return m;
}

double VIterate::sup_dev_from_v0() const {
  const auto& nodes = ws->grid.nodes;
  double m = 0.0;
  for (size_t i = 0; i < nodes.size(); ++i) {
    m = std::max(m, std::abs(w[i] - 1.0));
    if (i + 1 < nodes.size()) {
      for (double frac : {0.2, 0.4, 0.6, 0.8}) {
        const double u = nodes[i] * std::pow(nodes[i + 1] / nodes[i], frac);
        m = std::max(m, std::abs(w_at(u) - 1.0));
      }
    }
  }
  return m;
}

void VIterate::finalize() {
  const auto& nodes = ws->grid.nodes;
  const size_t n = nodes.size();
  // interpolate w on log(u); the grid is uniform there, so five-point
  // centered slopes keep the interpolant at fourth order
  std::vector<double> xs(n), slopes(n);
  for (size_t i = 0; i < n; ++i) xs[i] = std::log(nodes[i]);
  const double h = xs[1] - xs[0];
  for (size_t i = 0; i < n; ++i) {
    if (i >= 2 && i + 2 < n)
      slopes[i] =
          (-w[i + 2] + 8.0 * w[i + 1] - 8.0 * w[i - 1] + w[i - 2]) / (12.0 * h);
    else if (i >= 1 && i + 1 < n)
      slopes[i] = (w[i + 1] - w[i - 1]) / (2.0 * h);
    else if (i == 0)
      slopes[i] = (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * h);
    else
      slopes[i] = (3.0 * w[n - 1] - 4.0 * w[n - 2] + w[n - 3]) / (2.0 * h);
  }
  w_interp_ = hermite_interpolant(xs, std::vector<double>(w), slopes);

  // backward cumulative integral of 1/v
  S.assign(n, 0.0);
  S[n - 1] = ws->tail_inv_v0(ws->Umax) + tail_coeff * ws->tail_Q_over_v0(ws->Umax);
  auto inv_v = [this](double t) { return 1.0 / v_at(t); };
  for (size_t i = n - 1; i-- > 0;)
    S[i] = S[i + 1] + integrate_finite(inv_v, nodes[i], nodes[i + 1], kCellSpec);
}

double choose_U0(const Nonlinearity& nl, int N, double rho) {
  if (!(rho > 0.0 && rho < 0.25))
    throw std::invalid_argument("choose_U0: rho must lie in (0, 1/4)");
  if (!keller_osserman(nl).holds())
    throw std::invalid_argument("choose_U0: blow-up existence condition fails");

  GEvaluator G = antiderivative_G(nl);
  auto inv_v0 = [&nl](double t) { return 1.0 / nl.sqrt2F(t); };

  const double lo0 = std::max(nl.a() + 1.0, 1.0);
  const double cap = 1e12;
  for (double U = lo0; U < cap; U *= std::pow(2.0, 1.0 / 8.0)) {
    IntegrandTail desc = nl.inv_sqrt_2F_tail();
    desc.cutoff = std::max(desc.cutoff, U);
    const double T0 = integrate_tail(inv_v0, U, desc).value;
    if (!(T0 / (1.0 - rho) <= 0.5)) continue;

    bool ok = true;
    if (N > 1) {
      const double top =
          std::min(std::max({100.0 * U, 100.0 * nl.tail().cutoff}), nl.huge_u());
      const double GU = G(U);
      for (int j = 0; j <= 160 && ok; ++j) {
        const double u = U * std::pow(top / U, j / 160.0);
        const double H = 2.0 * (N - 1) * (G(u) - GU) / nl.F(u);
        if (H > rho) ok = false;
      }
    }
    if (ok) return U;
  }
  throw std::runtime_error(
      "choose_U0: no admissible threshold below the cap (the existence "
      "condition is only marginally satisfied)");
}

std::shared_ptr<const PicardWorkspace> make_workspace(const Nonlinearity& nl,
                                                      int N,
                                                      const PicardConfig& cfg) {
  if (N < 1) throw std::invalid_argument("make_workspace: N must be >= 1");
  auto ws = std::make_shared<PicardWorkspace>(nl);
  ws->N = N;
  ws->rho = cfg.rho;
  ws->U0 = choose_U0(nl, N, cfg.rho);
  ws->G = std::make_shared<GEvaluator>(antiderivative_G(nl));

  // Grid top: the closed-form region must carry less than both a fraction of
  // the distance scale at U0 and of the smallest queried distance.
  auto inv_v0 = [&nl](double t) { return 1.0 / nl.sqrt2F(t); };
  IntegrandTail desc0 = nl.inv_sqrt_2F_tail();
  desc0.cutoff = std::max(desc0.cutoff, ws->U0);
  const double T0_U0 = integrate_tail(inv_v0, ws->U0, desc0).value;
  const double tau = std::min(1e-3 * T0_U0, 0.1 * cfg.d_min);
  auto tail_fn = [&](double u) {
    IntegrandTail d = nl.inv_sqrt_2F_tail();
    d.cutoff = std::max(d.cutoff, u);
    return integrate_tail(inv_v0, u, d).value;
  };
  const double Umax = invert_monotone(tail_fn, tau, ws->U0,
                                      std::min(1e6 * ws->U0, 0.5 * nl.huge_u()),
                                      1e-6 * tau);
  ws->Umax = Umax;
  ws->grid = LogGrid::make(ws->U0, Umax, cfg.grid_per_decade);
  const size_t n = ws->grid.nodes.size();
  ws->v0_node.resize(n);
  ws->F_node.resize(n);
  for (size_t i = 0; i < n; ++i) {
    ws->v0_node[i] = nl.sqrt2F(ws->grid.nodes[i]);
    ws->F_node[i] = nl.F(ws->grid.nodes[i]);
  }
  return ws;
}

VIterate make_v0(std::shared_ptr<const PicardWorkspace> ws) {
  VIterate v;
  v.ws = std::move(ws);
  v.k = 0;
  v.w.assign(v.ws->grid.nodes.size(), 1.0);
  v.tail_coeff = 0.0;
  v.finalize();
  return v;
}

VIterate apply_N(const VIterate& v) {
  const PicardWorkspace& ws = *v.ws;
  const double dev = v.sup_dev_from_v0();
  if (dev > ws.rho * (1.0 + 1e-9)) {
    std::ostringstream msg;
    msg << "apply_N: input leaves the ball (sup |v/v0 - 1| = " << dev
        << " > rho = " << ws.rho << ")";
    throw std::invalid_argument(msg.str());
  }

  const auto& nodes = ws.grid.nodes;
  const size_t n = nodes.size();
  const double nu = ws.N - 1;

  VIterate out;
  out.ws = v.ws;
  out.k = v.k + 1;
  out.w.assign(n, 1.0);

  if (ws.N > 1) {
    // radius along the input iterate, interpolated with exact slopes 1/v
    std::vector<double> xs(n), rn(n), slope(n);
    for (size_t i = 0; i < n; ++i) {
      xs[i] = nodes[i];
      rn[i] = 1.0 - v.S[i];
      slope[i] = 1.0 / (v.w[i] * ws.v0_node[i]);
    }
    Interpolant r_interp = hermite_interpolant(xs, rn, slope);

    auto integrand = [&](double t) { return v.v_at(t) / r_interp(t); };
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
      if (i > 0)
        acc += integrate_finite(integrand, nodes[i - 1], nodes[i], kCellSpec);
      const double radicand = 1.0 - nu * acc / ws.F_node[i];
      if (!(radicand > 0.0)) {
        std::ostringstream msg;
        msg << "apply_N: radicand closed at u = " << nodes[i]
            << "; increase U0";
        throw std::runtime_error(msg.str());
      }
      out.w[i] = std::sqrt(radicand);
    }
  }

  const double QU = ws.Q(ws.Umax);
  out.tail_coeff = QU > 1e-300 ? (1.0 - out.w.back()) / QU : 0.0;
  out.finalize();
  return out;
}

PicardResult fixed_point(const Nonlinearity& nl, int N,
                         const PicardConfig& cfg) {
  PicardResult res;
  res.ws = make_workspace(nl, N, cfg);
  res.history.push_back(make_v0(res.ws));

  double prev_gap = -1.0;
  int stalled = 0;
  for (int k = 1; k <= cfg.max_iters; ++k) {
    VIterate next = apply_N(res.history.back());
    const double gap = next.sup_gap(res.history.back());
    res.history.push_back(std::move(next));
    if (prev_gap > 0.0) {
      const double kap = gap / prev_gap;
      res.kappa.push_back(kap);
      if (kap >= 1.0 && gap > 10.0 * cfg.sup_tol) {
        if (++stalled >= 3) {
          std::ostringstream msg;
          msg << "fixed_point: not contracting (gap " << gap
              << " after " << k << " iterations); a larger U0 may be needed";
          throw std::runtime_error(msg.str());
        }
      } else {
        stalled = 0;
      }
    }
    prev_gap = gap;
    if (gap < cfg.sup_tol) {
      res.converged_at = k;
      break;
    }
  }
  if (res.converged_at < 0)
    throw std::runtime_error("fixed_point: iteration budget exhausted");
  res.residual = apply_N(res.fixed()).sup_gap(res.fixed());
  return res;
}

double invert_uk(const VIterate& vk, double r) {
  if (!(r < 1.0))
    throw std::invalid_argument("invert_uk: r must be below 1");
  const double d = 1.0 - r;
  const PicardWorkspace& ws = *vk.ws;
  const double S_top = vk.S[0];
  if (d > S_top) {
    std::ostringstream msg;
    msg << "invert_uk: r = " << r << " precedes the asymptotic regime (r_min "
        << 1.0 - S_top << ")";
    throw std::out_of_range(msg.str());
  }
  const auto& nodes = ws.grid.nodes;
  if (d >= vk.S.back()) {
    // bracket by the cached node values, then solve inside one cell
    size_t lo = 0, hi = nodes.size() - 1;
    while (hi - lo > 1) {
      const size_t mid = (lo + hi) / 2;
      (vk.S[mid] >= d ? lo : hi) = mid;
    }
    auto Sfn = [&vk](double u) { return vk.S_at(u); };
    return invert_monotone(Sfn, d, nodes[lo], nodes[hi], 1e-12 * d);
  }
  // past the grid top: Newton on the closed-form tail model
  double u = ws.Umax;
  const TailModel& t = ws.nl.tail();
  if (t.kind == TailModel::Kind::PowerLaw) {
    const double e = 0.5 * t.exponent_or_rate;
    u = ws.Umax * std::pow(vk.S.back() / d, 1.0 / (e - 1.0));
  } else if (t.kind == TailModel::Kind::Exponential) {
    u = ws.Umax + 2.0 * std::log(vk.S.back() / d) / t.exponent_or_rate;
  }
  for (int it = 0; it < 60; ++it) {
    const double f = vk.S_at(u) - d;
    if (std::abs(f) <= 1e-12 * d) return u;
    u += f * vk.v_at(u);  // dS/du = -1/v
    u = std::min(std::max(u, ws.Umax), ws.nl.huge_u());
  }
  throw std::runtime_error("invert_uk: tail inversion did not converge");
}

GapTable asymptotic_gap(const PicardResult& pr, int k,
                        const std::function<double(double)>& u_ref,
                        std::span<const double> rs) {
  if (k < 0 || static_cast<size_t>(k) >= pr.history.size())
    throw std::invalid_argument("asymptotic_gap: iterate index out of range");
  const VIterate& vk = pr.history[static_cast<size_t>(k)];
  const VIterate& v0 = pr.history.front();
  const bool has_next = static_cast<size_t>(k + 1) < pr.history.size();

  GapTable out;
  for (double r : rs) {
    const double uk = invert_uk(vk, r);
    const double uref = u_ref(r);
    const double W_uk = v0.S_at(uk);
    const double W_ref = v0.S_at(uref);
    out.r.push_back(r);
    out.ratio_oracle.push_back((W_uk - W_ref) / W_uk);
    if (has_next) {
      const double un = invert_uk(pr.history[static_cast<size_t>(k + 1)], r);
      out.ratio_next.push_back((W_uk - v0.S_at(un)) / W_uk);
    } else {
      out.ratio_next.push_back(0.0);
    }
  }
  return out;
}

}  // namespace blowup
