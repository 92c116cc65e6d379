#pragma once

#include <cstddef>
#include <span>

namespace ownet {

struct RegressionResult {
  double intercept = 0.0;
  double slope = 0.0;
  double se_intercept = 0.0;
  double se_slope = 0.0;
  double t_intercept = 0.0;
  double t_slope = 0.0;
  double p_intercept = 1.0;  // two-sided, Student t with n - 2 dof
  double p_slope = 1.0;
  double r_squared = 0.0;
  double adjusted_r_squared = 0.0;
  std::size_t n = 0;
};

/// Simple linear regression y = a + b x by ordinary least squares. Requires
/// n >= 3 and non-constant x. A perfect fit yields infinite t-statistics and
/// zero p-values; a constant y yields r_squared = 0.
RegressionResult ols_regression(std::span<const double> x, std::span<const double> y);

}  // namespace ownet
