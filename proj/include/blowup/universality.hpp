#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "blowup/nonlinearity.hpp"
#include "blowup/phase_plane.hpp"
#include "blowup/picard.hpp"

namespace blowup {

/// Criterion function deciding whether a single profile term captures every
/// blow-up solution:
///   Phi(u) = sqrt(2F(u)) * int_u^inf G(t) (2F(t))^{-3/2} dt,
/// with G based at lower_limit (default max(a, 0)).
class PhiEvaluator {
 public:
  explicit PhiEvaluator(
      const Nonlinearity& nl,
      double lower_limit = std::numeric_limits<double>::quiet_NaN());

  double operator()(double u) const;
  /// The outer integral alone.
  double outer(double u) const;
  double lower_limit() const { return ll_; }

 private:
  Nonlinearity nl_;
  double ll_;
  std::shared_ptr<const GEvaluator> G_;
  std::shared_ptr<const UpperTailIntegral> outer_;
};

double phi(const Nonlinearity& nl, double u,
           double lower_limit = std::numeric_limits<double>::quiet_NaN());

struct UniversalityReport {
  enum class Class { Universal, NonUniversal, Inconclusive };

  Class verdict = Class::Inconclusive;
  Class sampled_verdict = Class::Inconclusive;
  bool has_closed_rule = false;
  std::optional<double> closed_form_limit;  ///< limit of Phi when analytic
  std::vector<double> u_samples, phi_samples;
  /// second-term gap samples (r, u1(r) - u0(r)); filled by universality_report
  std::vector<double> gap_r, gap_values;
};

const char* to_string(UniversalityReport::Class c);

/// Classifies the blow-up rate: samples Phi on a doubling ladder and, when
/// the tail is analytic, decides by the exact exponent rule (power tails are
/// universal iff the antiderivative exponent exceeds 4; exponential tails
/// always are). A disagreement between the rules is reported via
/// sampled_verdict.
UniversalityReport classify(const Nonlinearity& nl);

/// classify plus the second-term gap samples at the given radii.
UniversalityReport universality_report(const Nonlinearity& nl, int N,
                                       std::span<const double> rs,
                                       const PicardConfig& cfg = {});

struct SecondTermGapTable {
  std::vector<double> r;
  std::vector<double> u0, u1;
  std::vector<double> gap;             ///< u1 - u0
  std::vector<double> gap_normalized;  ///< (u1 - u0)/sqrt(2F(u0))
  std::vector<double> upper_rhs;       ///< (N-1) * outer(u1)
  std::vector<double> lower_lhs;       ///< outer(u0) - outer(u1)
  std::vector<double> lower_rhs;       ///< (u1^2 - u0^2) / (4 F(u0))
};

/// Tabulates the gap between the first two profile iterates against the two
/// bounding quantities that control it.
SecondTermGapTable second_term_gap(const Nonlinearity& nl, int N,
                                   std::span<const double> rs,
                                   const PicardConfig& cfg = {});

struct OneTermTable {
  std::vector<double> r;
  std::vector<double> u_oracle, u0;
  std::vector<double> gap;      ///< u_oracle - u0
  std::vector<double> bound;    ///< Phi(u_oracle)
  std::vector<double> fitted_C; ///< gap / bound
};

/// Measures the distance between the oracle solution and the leading
/// profile, against the criterion-function bound.
OneTermTable verify_one_term(const Nonlinearity& nl, const RadialSolution& sol,
                             std::span<const double> rs);

}  // namespace blowup
