#pragma once

#include <functional>
#include <string>
#include <vector>

namespace blowup {

using RealFn = std::function<double(double)>;

/// Accuracy contract for adaptive quadrature.
struct QuadratureSpec {
  double rel_tol = 1e-12;
  double abs_tol = 1e-15;
  int max_subdivisions = 4000;
};

/// Adaptive Gauss-Kronrod (G7,K15) integration of g over [lo, hi].
///
/// The error target is max(abs_tol, rel_tol*|result|). Integrable endpoint
/// singularities (inverse square-root type) are handled by graded bisection;
/// the rule never evaluates g at interval endpoints. Throws
/// std::runtime_error with a report of the worst interval when the
/// subdivision budget is exhausted.
double integrate_finite(const RealFn& g, double lo, double hi,
                        const QuadratureSpec& spec = {});

/// How an integrand behaves beyond a cutoff, so that improper integrals can
/// be closed analytically instead of truncated.
enum class TailKind {
  Power,        ///< g(t) ~ A * t^-exponent
  Exponential,  ///< g(t) ~ A * exp(-rate * t)
  DecayProbe,   ///< decays faster than any fixed power; probe until negligible
  Sampled,      ///< no analytic form; classify decay from samples
};

struct IntegrandTail {
  TailKind kind = TailKind::Power;
  double exponent = 2.0;  ///< Power only
  double rate = 1.0;      ///< Exponential only
  double cutoff = 1.0;    ///< model trusted for t >= cutoff
  double validate_tol = 1e-7;

  static IntegrandTail power(double exponent, double cutoff,
                             double validate_tol = 1e-7);
  static IntegrandTail exponential(double rate, double cutoff,
                                   double validate_tol = 1e-7);
  static IntegrandTail decay_probe(double cutoff);
  static IntegrandTail sampled(double cutoff);
};

enum class TailStatus { Finite, Infinite, Inconclusive };

struct TailIntegral {
  TailStatus status = TailStatus::Finite;
  double value = 0.0;        ///< finite value; +inf when status == Infinite
  double cutoff_used = 0.0;  ///< where the closed-form tail was attached

  bool finite() const { return status == TailStatus::Finite; }
};

/// Integral of g over [lo, +inf).
///
/// The finite part up to the (possibly auto-extended) cutoff is computed by
/// integrate_finite; the remainder is closed in terms of the tail
/// description, with the amplitude fitted from g at the cutoff and validated
/// at points beyond it. A Power tail with exponent <= 1 yields an Infinite
/// verdict. Throws std::runtime_error if the integrand refuses to match its
/// description within the validation tolerance.
TailIntegral integrate_tail(const RealFn& g, double lo,
                            const IntegrandTail& tail,
                            const QuadratureSpec& spec = {});

/// Solves h(x) = target for monotone h on [lo, hi] by bisection with secant
/// acceleration. Stops when |h(x) - target| <= tol. If h(lo), h(hi) do not
/// straddle the target the bracket is expanded geometrically before giving
/// up.
double invert_monotone(const RealFn& h, double target, double lo, double hi,
                       double tol);

/// Cached evaluator of S(t) = integral of h over [t, inf). A geometric
/// ladder of checkpoints spans [lo, ladder_top]; the remainder past the top
/// is closed through the integrand tail description. Queries integrate only
/// across a fraction of one rung, and instances are immutable after
/// construction.
class UpperTailIntegral {
 public:
  UpperTailIntegral(RealFn h, double lo, double ladder_top, IntegrandTail tail,
                    QuadratureSpec spec = {1e-12, 1e-300, 40000});

  double operator()(double t) const;
  double lo() const { return xs_.front(); }
  double ladder_top() const { return xs_.back(); }

 private:
  RealFn h_;
  IntegrandTail tail_;
  QuadratureSpec spec_;
  std::vector<double> xs_, vals_;  // vals_[i] = S(xs_[i])
};

/// Piecewise cubic Hermite on strictly increasing nodes. Evaluation outside
/// the node range extrapolates with the boundary cubic.
class Interpolant {
 public:
  Interpolant() = default;
  Interpolant(std::vector<double> xs, std::vector<double> ys,
              std::vector<double> slopes);

  double operator()(double x) const;
  double derivative(double x) const;

  double x_min() const { return xs_.front(); }
  double x_max() const { return xs_.back(); }
  const std::vector<double>& xs() const { return xs_; }
  const std::vector<double>& ys() const { return ys_; }

 private:
  std::vector<double> xs_, ys_, slopes_;
};

/// Monotonicity-preserving C^1 cubic (Fritsch-Carlson slopes). Requires
/// strictly increasing xs and monotone ys; exact at the nodes.
Interpolant monotone_interpolant(std::vector<double> xs,
                                 std::vector<double> ys);

/// General C^1 cubic through (xs, ys) with prescribed derivatives.
Interpolant hermite_interpolant(std::vector<double> xs, std::vector<double> ys,
                                std::vector<double> dys);

/// Geometrically spaced nodes from u0 to umax at a given density in points
/// per decade. First node is exactly u0, last exactly umax.
struct LogGrid {
  std::vector<double> nodes;
  double density = 0.0;

  static LogGrid make(double u0, double umax, double per_decade);
};

}  // namespace blowup
