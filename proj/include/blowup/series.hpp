#pragma once

#include <string>
#include <vector>

namespace blowup {

/// Finitely many coefficients on the exponent lattice alpha + k*delta,
/// together with the largest exponent up to which the truncation is faithful
/// (terms with exponent <= order are exactly the stored ones; beyond it the
/// function may have further terms we know nothing about).
class PuiseuxSeries {
 public:
  PuiseuxSeries() = default;
  PuiseuxSeries(double alpha, double delta, std::vector<double> coeffs,
                double order, std::string variable);

  /// Single exact term c * x^alpha, trusted through `order`.
  static PuiseuxSeries monomial(double c, double alpha, double delta,
                                double order, std::string variable);

  double alpha() const { return alpha_; }
  double delta() const { return delta_; }
  double order() const { return order_; }
  const std::string& variable() const { return variable_; }
  const std::vector<double>& coeffs() const { return coeffs_; }
  size_t terms() const { return coeffs_.size(); }
  double exponent(size_t k) const { return alpha_ + static_cast<double>(k) * delta_; }
  double coeff_at_exponent(double e) const;
  bool is_zero() const;

  double eval(double x) const;

  /// Drops leading zero coefficients and terms beyond the order.
  PuiseuxSeries normalized() const;

 private:
  double alpha_ = 0.0;
  double delta_ = 1.0;
  std::vector<double> coeffs_;
  double order_ = 0.0;
  std::string variable_ = "x";
};

PuiseuxSeries series_add(const PuiseuxSeries& a, const PuiseuxSeries& b);
PuiseuxSeries series_sub(const PuiseuxSeries& a, const PuiseuxSeries& b);
PuiseuxSeries series_scale(const PuiseuxSeries& a, double factor);
PuiseuxSeries series_mul(const PuiseuxSeries& a, const PuiseuxSeries& b);

/// 1/s; requires a nonzero leading coefficient.
PuiseuxSeries series_recip(const PuiseuxSeries& s);

/// sqrt(s); requires a positive leading coefficient.
PuiseuxSeries series_sqrt(const PuiseuxSeries& s);

/// (1 + h)^e for h with strictly positive leading exponent.
PuiseuxSeries series_pow_one_plus(const PuiseuxSeries& h, double e);

/// Term-wise integral over the upper tail in the original variable t, for a
/// series expressed in x = 1/t: c*x^E stands for c*t^-E, and
/// int_t^inf c s^-E ds = c t^{1-E}/(E-1), requiring E > 1 for every kept
/// term. Throws std::domain_error on a divergent term.
PuiseuxSeries series_integrate_tail(const PuiseuxSeries& s);

/// Term-wise antiderivative int^u in the original variable, dropping the
/// integration constant; the result is therefore trusted only below exponent
/// zero. A term with exponent exactly one (a logarithm) throws
/// std::domain_error.
PuiseuxSeries series_antiderivative(const PuiseuxSeries& s);

/// s evaluated at x*(1 + g(x)) for g with strictly positive leading
/// exponent and integer-compatible lattice.
PuiseuxSeries series_compose_shift(const PuiseuxSeries& s,
                                   const PuiseuxSeries& g);

}  // namespace blowup
