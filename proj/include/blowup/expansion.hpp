#pragma once

#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "blowup/nonlinearity.hpp"
#include "blowup/series.hpp"

namespace blowup {

/// Boundary expansion of the blow-up solution of the radial equation with
/// f(u) = u^p: u(r) = sum_k a_k d^{k - m} + o(1), d = 1 - r, m = 2/(p - 1).
struct PowerLawExpansion {
  double p = 0.0;
  int N = 1;
  double m = 0.0;                  ///< 2/(p-1)
  int K = 0;                       ///< floor(m), last singular index
  std::vector<double> a;           ///< coefficients (f(u) = u^p normalization)
  std::vector<double> exponents;   ///< k - m
  double normalization_factor = 1.0;  ///< applied to the internal scaled run
  bool resonant_lattice = false;   ///< m integral: exponents collide with Z
  int requested_order = 0;
  int computed_order = 0;          ///< may be capped below the resonant slot

  /// The expansion as a series in d, original normalization.
  PuiseuxSeries u_series;

  double eval(double d) const { return u_series.eval(d); }
};

/// Runs the inductive profile recursion for f(u) = u^p and inverts the
/// boundary relation order by order. Internally the computation uses the
/// scaled antiderivative u^{2q}/2 with 2q - 1 = p; coefficients are
/// converted back on output (see normalization_factor).
PowerLawExpansion power_law_expansion(double p, int N, int order);

/// Number of non-vanishing (singular) terms: floor(2/(p-1)) + 1.
int singular_term_count(double p);

/// Implicit three-term boundary relation for a general nonlinearity:
/// 1 - r = R0(U) + R1(U) + R2(U)(1 + o(1)) at U = u_2(r).
struct ThreeTermTable {
  std::vector<double> U, R0, R1, R2;
  std::function<double(double)> R0_fn, R1_fn, R2_fn;
  int N = 1;
  double lower_limit = 0.0;

  double total(double u) const { return R0_fn(u) + R1_fn(u) + R2_fn(u); }
};

/// Builds the three boundary functionals on the given grid of heights.
/// Inner indefinite integrals are based at lower_limit (defaults to
/// max(a, 0) when NaN is passed).
ThreeTermTable three_term_table(
    const Nonlinearity& nl, int N, std::span<const double> Ugrid,
    double lower_limit = std::numeric_limits<double>::quiet_NaN());

/// Solves 1 - r = R0 + R1 + R2 for the height; the target must fall inside
/// the table's range.
double invert_three_term(const ThreeTermTable& table, double r);

}  // namespace blowup
