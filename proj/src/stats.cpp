#include "gaussperc/stats.hpp"

#include <algorithm>
#include <cmath>

#include "gaussperc/errors.hpp"

namespace gaussperc::stats {

double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

double pairwise_sum(const std::vector<double>& x) { return pairwise_sum(x.data(), x.size()); }

double z95() { return 1.959963984540054; }

Interval wilson(std::size_t k, std::size_t n, double z) {
  if (n == 0) throw DomainError("Wilson interval needs n > 0");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {k == 0 ? 0.0 : std::max(0.0, centre - half), k == n ? 1.0 : std::min(1.0, centre + half)};
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double anderson_darling(std::vector<double> x, bool estimate, double mean, double sd) {
  const std::size_t n = x.size();
  if (n < 8) throw DomainError("Anderson-Darling needs at least 8 values");
  if (estimate) {
    mean = pairwise_sum(x) / static_cast<double>(n);
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = (x[i] - mean) * (x[i] - mean);
    sd = std::sqrt(pairwise_sum(sq) / static_cast<double>(n - 1));
  }
  std::sort(x.begin(), x.end());
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double zi = (x[i] - mean) / sd;
    const double zj = (x[n - 1 - i] - mean) / sd;
    // log Phi(z) and log(1 - Phi(z)) without cancellation
    const double lo = std::log(normal_cdf(zi));
    const double hi = std::log(normal_cdf(-zj));
    s += (2.0 * static_cast<double>(i) + 1.0) * (lo + hi);
  }
  const double nn = static_cast<double>(n);
  double a2 = -nn - s / nn;
  if (estimate) a2 *= 1.0 + 0.75 / nn + 2.25 / (nn * nn);
  return a2;
}

double anderson_darling_critical_5pct(bool estimate) { return estimate ? 0.752 : 2.492; }

MeanSe mean_se(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 2) throw DomainError("mean_se needs at least two values");
  const double m = pairwise_sum(x) / static_cast<double>(n);
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = (x[i] - m) * (x[i] - m);
  const double var = pairwise_sum(sq) / static_cast<double>(n - 1);
  return {m, std::sqrt(var / static_cast<double>(n))};
}

}  // namespace gaussperc::stats
