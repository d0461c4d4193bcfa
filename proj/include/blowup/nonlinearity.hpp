#pragma once

#include <memory>
#include <string>

#include "blowup/numerics.hpp"

namespace blowup {

/// Asymptotic model for the antiderivative F beyond a cutoff, used to close
/// improper integrals analytically. Validated against F by sampling at
/// construction of a Nonlinearity.
struct TailModel {
  enum class Kind { PowerLaw, Exponential, NumericOnly };

  Kind kind = Kind::PowerLaw;
  double amplitude = 1.0;         ///< c in F ~ c u^s or F ~ c e^{lambda u}
  double exponent_or_rate = 2.0;  ///< s or lambda
  double cutoff = 1.0;            ///< trusted for u >= cutoff
  double validation_tol = 1e-6;

  static TailModel power_law(double amplitude, double exponent, double cutoff,
                             double validation_tol = 1e-6);
  static TailModel exponential(double amplitude, double rate, double cutoff,
                               double validation_tol = 1e-6);
  static TailModel numeric_only(double cutoff);

  /// Model value of F(u); NaN for NumericOnly.
  double value(double u) const;
};

/// Cached antiderivative x -> integral of fn from base to x.
///
/// A geometric ladder of checkpoints is built eagerly at construction, so
/// lookups only integrate across a fraction of one rung and instances are
/// safe for concurrent read-only use. Past the ladder the supplied value
/// model (offset-matched at the top rung) takes over; without a model the
/// remainder is integrated directly on each call.
class CachedAntiderivative {
 public:
  CachedAntiderivative(RealFn integrand, double base, double eager_top,
                       std::function<double(double)> value_model = nullptr);

  double operator()(double x) const;
  double base() const { return base_; }
  double ladder_top() const { return xs_.back(); }

 private:
  RealFn fn_;
  double base_;
  std::vector<double> xs_, vals_;
  std::function<double(double)> model_;
  double model_offset_ = 0.0;
};

/// A nonlinearity f with its antiderivative F (F(a) = 0 except for the
/// exponential family, which absorbs the constant into F = e^u), the
/// positivity threshold a, and the tail behaviour of F.
class Nonlinearity {
 public:
  double f(double u) const;
  double F(double u) const;
  double sqrt2F(double u) const;  ///< sqrt(2 max(F, 0))
  double a() const;
  const TailModel& tail() const;
  const std::string& label() const;

  /// Largest u at which F stays below the overflow guard (1e100).
  double huge_u() const;

  /// Tail descriptor for the integrand 1/sqrt(2F).
  IntegrandTail inv_sqrt_2F_tail() const;
  /// Tail descriptor for the integrand 1/F.
  IntegrandTail inv_F_tail() const;

  struct Impl;
  explicit Nonlinearity(std::shared_ptr<const Impl> impl)
      : impl_(std::move(impl)) {}

 private:
  std::shared_ptr<const Impl> impl_;
};

/// f(u) = u^p for u > 0, F(u) = u^{p+1}/(p+1), a = 0. Rejects p <= 1.
Nonlinearity make_power(double p);

/// f(u) = F(u) = e^u, a = 0 (constant offset of F absorbed).
Nonlinearity make_exponential();

/// f given by an expression in u (see parse_expression); F built by cached
/// adaptive quadrature from a. Requires f(a) > 0 and f >= 0 sampled beyond a.
Nonlinearity make_custom(const std::string& expr, double a, TailModel tail);

/// Assembles a nonlinearity from raw evaluators and runs the same
/// construction checks as the other factories.
Nonlinearity make_from_functions(RealFn f, RealFn F, double a, TailModel tail,
                                 std::string label,
                                 bool check_base_point = true);

enum class Verdict { Holds, Fails, Inconclusive };

const char* to_string(Verdict v);

struct KoResult {
  Verdict verdict = Verdict::Inconclusive;
  /// Value of the tail integral of 1/sqrt(F) taken from a+1; +inf when the
  /// integral diverges, NaN when inconclusive.
  double tail_integral = 0.0;

  bool holds() const { return verdict == Verdict::Holds; }
};

/// Convergence verdict of the integral of 1/sqrt(F) at infinity.
KoResult keller_osserman(const Nonlinearity& nl);

/// Verdict of the reflected-side condition: the antiderivative G of
/// t -> f(-t) (based at 0) must satisfy integral of 1/sqrt(G) = +inf.
/// reflected_tail describes G at infinity; amplitude with exponent 0 stands
/// for bounded G.
Verdict ko2_check(const Nonlinearity& nl, const TailModel& reflected_tail);

/// Cached evaluator of G(u) = integral of sqrt(2F) from the base point.
class GEvaluator {
 public:
  GEvaluator(const Nonlinearity& nl, double base);

  double operator()(double u) const { return (*cache_)(u); }
  double base() const { return base_; }
  const Nonlinearity& nl() const { return nl_; }

  /// Asymptotic model of G without the additive constant; NaN if the
  /// nonlinearity carries no analytic tail.
  double model_value(double u) const;

 private:
  Nonlinearity nl_;
  double base_;
  std::shared_ptr<const CachedAntiderivative> cache_;
};

/// G based at the nonlinearity's threshold a.
GEvaluator antiderivative_G(const Nonlinearity& nl);

}  // namespace blowup
