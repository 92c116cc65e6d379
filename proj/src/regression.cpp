#include "ownet/regression.hpp"

#include <cmath>
#include <limits>

#include <boost/math/distributions/students_t.hpp>

#include "ownet/error.hpp"

namespace ownet {

namespace {

double two_sided_p(double t, double dof) {
  if (std::isinf(t)) return 0.0;
  if (std::isnan(t)) return 1.0;
  boost::math::students_t dist(dof);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

double safe_ratio(double num, double se) {
  if (se > 0.0) return num / se;
  if (num == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return std::copysign(std::numeric_limits<double>::infinity(), num);
}

}  // namespace

RegressionResult ols_regression(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("regression: x and y differ in length");
  const std::size_t n = x.size();
  if (n < 3) throw Error("regression: need at least 3 observations");

  // Centred sums keep the normal equations well conditioned.
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw Error("regression: x is constant, design matrix is singular");

  RegressionResult r;
  r.n = n;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - r.intercept - r.slope * x[i];
    sse += e * e;
  }
  const double dof = double(n) - 2.0;
  const double sigma2 = sse / dof;
  r.se_slope = std::sqrt(sigma2 / sxx);
  r.se_intercept = std::sqrt(sigma2 * (1.0 / double(n) + mx * mx / sxx));
  r.t_slope = safe_ratio(r.slope, r.se_slope);
  r.t_intercept = safe_ratio(r.intercept, r.se_intercept);
  r.p_slope = two_sided_p(r.t_slope, dof);
  r.p_intercept = two_sided_p(r.t_intercept, dof);
  r.r_squared = syy > 0.0 ? 1.0 - sse / syy : 0.0;
  r.adjusted_r_squared = 1.0 - (1.0 - r.r_squared) * (double(n) - 1.0) / dof;
  return r;
}

}  // namespace ownet
