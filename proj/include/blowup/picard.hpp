#pragma once

#include <memory>
#include <span>
#include <vector>

#include "blowup/nonlinearity.hpp"
#include "blowup/numerics.hpp"

namespace blowup {

struct PicardConfig {
  double rho = 0.2;              ///< ball radius, must be < 1/4
  double grid_per_decade = 48.0;
  double sup_tol = 1e-10;        ///< stop on the sup norm of an update
  int max_iters = 50;
  double d_min = 1e-5;  ///< smallest boundary distance inversions must reach
};

/// Immutable data shared by the iterates of one fixed-point run.
struct PicardWorkspace {
  Nonlinearity nl;
  int N = 1;
  double U0 = 0.0, Umax = 0.0, rho = 0.0;
  LogGrid grid;
  std::shared_ptr<const GEvaluator> G;
  std::vector<double> v0_node;  ///< sqrt(2F) at the nodes
  std::vector<double> F_node;

  explicit PicardWorkspace(Nonlinearity n) : nl(std::move(n)) {}

  /// Leading tail-correction shape (N-1) (G(u) - G(U0)) / (2 F(u)).
  double Q(double u) const;
  /// Closed-form integral of 1/v0 over [u, inf) for u >= tail cutoff.
  double tail_inv_v0(double u) const;
  /// Closed-form integral of Q/v0 over [u, inf).
  double tail_Q_over_v0(double u) const;
};

/// One profile-derivative iterate, stored as w = v/v0 at the grid nodes plus
/// a one-coefficient tail-correction model past the grid top.
class VIterate {
 public:
  std::shared_ptr<const PicardWorkspace> ws;
  int k = 0;
  std::vector<double> w;     ///< v/v0 at the nodes
  std::vector<double> S;     ///< integral of 1/v over [node, inf)
  double tail_coeff = 0.0;   ///< w(u) ~ 1 - tail_coeff * Q(u) past Umax

  double w_at(double u) const;
  double v_at(double u) const;
  /// Integral of 1/v over [u, inf); exact-quadrature path, valid u >= U0.
  double S_at(double u) const;
  double r_at(double u) const { return 1.0 - S_at(u); }

  /// Sup over nodes and four midpoints per cell of |w - other.w|.
  double sup_gap(const VIterate& other) const;
  /// Sup of |w - 1| on the same evaluation set.
  double sup_dev_from_v0() const;

 private:
  Interpolant w_interp_;
  friend VIterate make_v0(std::shared_ptr<const PicardWorkspace>);
  friend VIterate apply_N(const VIterate&);
  void finalize();
};

/// Smallest grid-aligned U0 satisfying the two sufficient conditions for the
/// map to stay inside and contract on the ball of radius rho.
double choose_U0(const Nonlinearity& nl, int N, double rho);

std::shared_ptr<const PicardWorkspace> make_workspace(const Nonlinearity& nl,
                                                      int N,
                                                      const PicardConfig& cfg);

VIterate make_v0(std::shared_ptr<const PicardWorkspace> ws);

/// One application of the integral map. Throws std::invalid_argument if the
/// input leaves the ball and std::runtime_error if the radicand closes
/// (U0 too small).
VIterate apply_N(const VIterate& v);

struct PicardResult {
  std::shared_ptr<const PicardWorkspace> ws;
  std::vector<VIterate> history;  ///< v_0, v_1, ...
  std::vector<double> kappa;      ///< update contraction factors
  double residual = 0.0;          ///< sup gap of one extra application
  int converged_at = -1;          ///< first k with ||v_k - v_{k-1}|| < tol

  const VIterate& fixed() const { return history.back(); }
};

PicardResult fixed_point(const Nonlinearity& nl, int N,
                         const PicardConfig& cfg = {});

/// Height of the k-th profile at radius r: solves S_k(u) = 1 - r.
double invert_uk(const VIterate& vk, double r);

struct GapTable {
  std::vector<double> r;
  std::vector<double> ratio_oracle;  ///< gap to the reference solution
  std::vector<double> ratio_next;    ///< gap to the next iterate
};

/// For each radius, the normalized asymptotic gaps
///   (W0(u_k) - W0(u_ref)) / W0(u_k) and (W0(u_k) - W0(u_{k+1})) / W0(u_k),
/// where W0 is the 1/v0 tail integral and u_ref(r) comes from the supplied
/// reference solution (typically the shooting oracle).
GapTable asymptotic_gap(const PicardResult& pr, int k,
                        const std::function<double(double)>& u_ref,
                        std::span<const double> rs);

}  // namespace blowup
