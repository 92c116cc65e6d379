#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "ownet/error.hpp"
#include "ownet/regression.hpp"

using namespace ownet;

namespace {

// Two-sided tail of Student's t by Simpson integration of the density.
double t_two_sided(double t, double dof) {
  const double c = std::tgamma((dof + 1) / 2) / (std::sqrt(dof * std::numbers::pi) * std::tgamma(dof / 2));
  auto pdf = [&](double x) { return c * std::pow(1 + x * x / dof, -(dof + 1) / 2); };
  const int steps = 200000;
  const double a = 0, b = std::fabs(t), h = (b - a) / steps;
  double s = pdf(a) + pdf(b);
  for (int i = 1; i < steps; ++i) s += pdf(a + i * h) * (i % 2 ? 4 : 2);
  return 1.0 - 2.0 * s * h / 3;
}

const std::vector<double> kX{0.5, 1.25, 2.0, 3.5, 4.0, 5.75, 6.0, 8.5};
const std::vector<double> kY{1.9, 3.1, 2.7, 6.2, 5.1, 8.8, 7.4, 12.9};

}  // namespace

TEST_CASE("perfect line") {
  std::vector<double> x, y;
  for (int i = 0; i < 10; ++i) {
    x.push_back(i * 0.7 - 1);
    y.push_back(2 + 3 * x.back());
  }
  auto r = ols_regression(x, y);
  CHECK(r.intercept == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(r.slope == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(r.r_squared == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.n == 10);
}

TEST_CASE("fixed eight-point dataset matches the normal equations") {
  auto r = ols_regression(kX, kY);
  auto ref = oracle::ols_reference(kX, kY);
  CHECK(std::fabs(r.intercept - (double)ref.intercept) < 1e-10);
  CHECK(std::fabs(r.slope - (double)ref.slope) < 1e-10);
  CHECK(std::fabs(r.t_intercept - (double)ref.t_intercept) < 1e-10);
  CHECK(std::fabs(r.t_slope - (double)ref.t_slope) < 1e-10);
  CHECK(std::fabs(r.r_squared - (double)ref.r_squared) < 1e-10);
  CHECK(std::fabs(r.adjusted_r_squared - (double)ref.adjusted_r_squared) < 1e-10);
  CHECK(r.adjusted_r_squared <= 1.0);
}

TEST_CASE("p-values follow Student's t with n - 2 degrees of freedom") {
  auto r = ols_regression(kX, kY);
  CHECK(r.p_slope == doctest::Approx(t_two_sided(r.t_slope, 6)).epsilon(1e-7));
  CHECK(r.p_intercept == doctest::Approx(t_two_sided(r.t_intercept, 6)).epsilon(1e-7));
}

TEST_CASE("residuals are orthogonal to the design") {
  synth::Rng rng(71);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(3 + rng.below(40)), y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = rng.uniform() * 100;
      y[i] = 5 - 0.3 * x[i] + 20 * rng.uniform();
    }
    auto r = ols_regression(x, y);
    double s = 0, sx = 0, scale = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double e = y[i] - r.intercept - r.slope * x[i];
      s += e;
      sx += e * x[i];
      scale += std::fabs(y[i]) * (1 + std::fabs(x[i]));
    }
    CHECK(std::fabs(s) / scale < 1e-8);
    CHECK(std::fabs(sx) / scale < 1e-8);
  }
}

TEST_CASE("constant response and degenerate designs") {
  std::vector<double> x{1, 2, 3, 4}, y{5, 5, 5, 5};
  auto r = ols_regression(x, y);
  CHECK(r.slope == 0.0);
  CHECK(r.adjusted_r_squared <= 0.0);
  std::vector<double> same{2, 2, 2}, three{1, 2, 3};
  CHECK_THROWS_AS(ols_regression(same, three), Error);
  std::vector<double> two{1, 2};
  CHECK_THROWS_AS(ols_regression(two, two), Error);
  CHECK_THROWS_AS(ols_regression(three, two), Error);
}
