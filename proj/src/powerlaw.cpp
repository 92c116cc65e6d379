#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/minima.hpp>

#include "ownet/error.hpp"
#include "ownet/netstats.hpp"

namespace ownet {

double hurwitz_zeta(double s, double q) {
  if (!(s > 1.0) || !(q > 0.0)) throw Error("hurwitz_zeta requires s > 1 and q > 0");
  // Euler-Maclaurin summation: explicit terms up to a = q + N, then the
  // integral tail and Bernoulli corrections.
  constexpr double kB2j[] = {1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66, -691.0 / 2730, 7.0 / 6};
  const int N = q < 16.0 ? static_cast<int>(std::ceil(16.0 - q)) : 0;
  double sum = 0.0;
  for (int k = 0; k < N; ++k) sum += std::pow(q + k, -s);
  const double a = q + N;
  sum += std::pow(a, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(a, -s);
  double rising = s;  // s (s+1) ... (s+2j-2)
  double fact = 2.0;  // (2j)!
  double apow = std::pow(a, -s - 1.0);
  for (int j = 1; j <= 7; ++j) {
    sum += kB2j[j - 1] / fact * rising * apow;
    rising *= (s + 2 * j - 1) * (s + 2 * j);
    fact *= (2.0 * j + 1) * (2.0 * j + 2);
    apow /= a * a;
  }
  return sum;
}

namespace {

struct TailFit {
  double gamma;
  double log_likelihood;
};

TailFit fit_tail(std::uint64_t x_min, std::size_t n, double sum_log) {
  const double dn = static_cast<double>(n);
  const double q = static_cast<double>(x_min);
  auto nll = [&](double gamma) { return dn * std::log(hurwitz_zeta(gamma, q)) + gamma * sum_log; };
  auto [gamma, value] = boost::math::tools::brent_find_minima(nll, 1.0 + 1e-9, 40.0, 52);
  return {gamma, -value};
}

double ks_distance(std::span<const std::uint64_t> tail, std::uint64_t x_min, double gamma) {
  const double z0 = hurwitz_zeta(gamma, double(x_min));
  const double n = static_cast<double>(tail.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < tail.size()) {
    std::size_t j = i;
    while (j < tail.size() && tail[j] == tail[i]) ++j;
    const double x = static_cast<double>(tail[i]);
    const double cdf_before = x > double(x_min) ? 1.0 - hurwitz_zeta(gamma, x) / z0 : 0.0;
    const double cdf_at = 1.0 - hurwitz_zeta(gamma, x + 1.0) / z0;
    d = std::max({d, std::abs(double(i) / n - cdf_before), std::abs(double(j) / n - cdf_at)});
    i = j;
  }
  return d;
}

}  // namespace

PowerLawFit fit_power_law(std::span<const std::uint64_t> samples, const PowerLawOptions& options) {
  std::vector<std::uint64_t> sorted;
  sorted.reserve(samples.size());
  for (auto x : samples) {
    if (x > 0) sorted.push_back(x);
  }
  std::sort(sorted.begin(), sorted.end());
  if (sorted.empty()) throw Error("power-law fit: no positive samples");
  if (sorted.front() == sorted.back()) throw Error("power-law fit: all samples equal, likelihood is degenerate");

  // suffix_log[i] = sum of log(sorted[j]) for j >= i
  std::vector<double> suffix_log(sorted.size() + 1, 0.0);
  for (std::size_t i = sorted.size(); i-- > 0;) suffix_log[i] = suffix_log[i + 1] + std::log(double(sorted[i]));

  auto fit_at = [&](std::uint64_t x_min) -> std::optional<PowerLawFit> {
    auto first = std::lower_bound(sorted.begin(), sorted.end(), x_min) - sorted.begin();
    std::size_t n = sorted.size() - static_cast<std::size_t>(first);
    if (n < options.min_tail) return std::nullopt;
    if (sorted[first] == sorted.back()) return std::nullopt;
    auto tail = std::span<const std::uint64_t>(sorted).subspan(static_cast<std::size_t>(first));
    auto t = fit_tail(x_min, n, suffix_log[first]);
    return PowerLawFit{t.gamma, x_min, n, t.log_likelihood, ks_distance(tail, x_min, t.gamma)};
  };

  if (options.x_min) {
    if (*options.x_min == 0) throw Error("power-law fit: x_min must be at least 1");
    auto first = std::lower_bound(sorted.begin(), sorted.end(), *options.x_min);
    if (static_cast<std::size_t>(sorted.end() - first) < options.min_tail) {
      throw Error("power-law fit: fewer than " + std::to_string(options.min_tail) + " samples >= x_min");
    }
    auto fit = fit_at(*options.x_min);
    if (!fit) throw Error("power-law fit: all samples >= x_min are equal");
    return *fit;
  }

  std::optional<PowerLawFit> best;
  std::size_t tried = 0;
  for (std::size_t i = 0; i < sorted.size() && tried < options.max_candidates; ++i) {
    if (i > 0 && sorted[i] == sorted[i - 1]) continue;
    ++tried;
    auto fit = fit_at(sorted[i]);
    if (!fit) break;  // tails only shrink from here
    if (!best || fit->ks_distance < best->ks_distance) best = fit;
  }
  if (!best) throw Error("power-law fit: fewer than " + std::to_string(options.min_tail) + " usable samples");
  return *best;
}

}  // namespace ownet
