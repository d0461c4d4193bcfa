#pragma once

#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "blowup/nonlinearity.hpp"
#include "blowup/numerics.hpp"

namespace blowup {

/// A radial trajectory in the (u, g, r) phase variables, where
/// g = F(u) - v^2/2 tracks the deviation from the flat energy relation and
/// r(u) is the radius at which the profile reaches height u. Sampled along
/// an adaptive integration with the exact derivatives stored, so evaluation
/// between samples is quartic-accurate.
class PhasePath {
 public:
  std::vector<double> u, g, r, dg, dr;  // samples and derivatives in u
  double blowup_radius = 0.0;           ///< r(u) limit as u -> inf
  double tail_beyond_stop = 0.0;        ///< integral of 1/v past the last sample
  int dimension = 1;
  Nonlinearity nl;

  explicit PhasePath(Nonlinearity n) : nl(std::move(n)) {}

  double u_min() const { return u.front(); }
  double u_max() const { return u.back(); }

  double g_at(double uu) const;
  double r_at(double uu) const;
  double v_at(double uu) const;  ///< sqrt(2 (F - g))

  /// Distance to the blow-up surface: S(u) = blowup_radius - r(u), evaluated
  /// by fresh quadrature over the stored profile (robust against drift in
  /// the r samples). Past the last sample the frozen-g tail model applies;
  /// the integration stop rule keeps its error below the tail target.
  double surface_distance(double uu) const;
  /// Inverse of surface_distance.
  double u_at_distance(double d) const;

 private:
  size_t segment(double uu) const;
  double tail_distance(double uu) const;  // frozen-g region, uu >= last sample
  std::vector<double> S_;  // cumulative surface distance at samples
  double frozen_g_ = 0.0;
  double u_drop_ = 0.0;          // beyond: g dropped entirely
  double tail_beyond_drop_ = 0.0;
  friend PhasePath integrate_phase(const Nonlinearity&, int, double, double,
                                   double, double, double);
};

/// Integrates dg/du = (N-1)/r * sqrt(2(F-g)), dr/du = 1/sqrt(2(F-g)) from
/// (u_start, g_start, r_start) up to u_stop with an embedded adaptive
/// Runge-Kutta pair at 1e-11 relative tolerance. The blow-up radius is the
/// final r plus a frozen-g tail closed through the tail model. When
/// tail_error_target > 0 the integration stops early once the frozen-g tail
/// estimate is provably below the target. Throws std::runtime_error
/// ("profile terminated") if F - g hits zero.
PhasePath integrate_phase(const Nonlinearity& nl, int N, double u_start,
                          double g_start, double r_start, double u_stop,
                          double tail_error_target = 0.0);

/// A large radial solution on the unit ball: center segment from the
/// regular r-integration glued to a phase-plane trajectory, with the shot
/// center value tuned so the blow-up radius is 1 within tol_radius.
class RadialSolution {
 public:
  PhasePath path;               ///< in original (unscaled) coordinates
  double center_value = 0.0;    ///< u(0)
  double raw_blowup_radius = 0.0;
  std::vector<double> inner_r, inner_u, inner_v;  ///< r-integration segment
  std::vector<double> overlap_r, overlap_u;       ///< r-run past the hand-off
  std::vector<std::pair<double, double>> shooting_history;  ///< (u_c, radius)

  explicit RadialSolution(Nonlinearity n) : path(std::move(n)) {}

  /// Height at scaled radius (blow-up at exactly 1); r in (0, 1).
  double u_at(double r) const;
  /// Scaled distance-to-boundary of a height: (blowup - r(u))/blowup.
  double distance_of(double u) const;
};

RadialSolution solve_large_solution(const Nonlinearity& nl, int N,
                                    double tol_radius = 1e-8);

/// The energy error along a solution, as a function of height.
RealFn error_term(const RadialSolution& sol);

/// One-dimensional blow-up profile at energy offset C:
/// integral from u(r) to infinity of dt/sqrt(2(F+C)) = 1 - r.
class EnergyProfile {
 public:
  EnergyProfile(Nonlinearity nl, double C);

  double S(double u) const;     ///< distance to the blow-up surface
  double u_at(double r) const;  ///< r in (0, 1)
  double energy_offset() const { return C_; }

 private:
  Nonlinearity nl_;
  double C_;
  std::shared_ptr<const UpperTailIntegral> S_;
};

struct PairGapReport {
  std::vector<double> r;
  std::vector<double> u1, u2;
  std::vector<double> gap;          ///< |u1 - u2|
  std::vector<double> f_gap;        ///< |F(u1) - F(u2)|
  std::vector<double> tail_inv_F;   ///< integral of dt/F from min(u1,u2)
  std::vector<double> fitted_C;     ///< gap / tail_inv_F
};

/// Tabulates the two-profile closeness estimates for a pair of
/// one-dimensional profiles with distinct energy offsets.
PairGapReport pair_gap_estimates(const Nonlinearity& nl,
                                 const EnergyProfile& p1,
                                 const EnergyProfile& p2,
                                 std::span<const double> rs);

}  // namespace blowup
