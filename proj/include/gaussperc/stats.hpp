#pragma once

#include <cstddef>
#include <vector>

namespace gaussperc::stats {

/// Recursive pairwise summation; result depends only on the order of `x`.
double pairwise_sum(const double* x, std::size_t n);
double pairwise_sum(const std::vector<double>& x);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// 1.959963984540054
double z95();

/// Wilson score interval for k successes in n trials.
Interval wilson(std::size_t k, std::size_t n, double z = z95());

/// Anderson-Darling A^2 for normality. With `estimate` the mean and variance
/// come from the sample and the statistic is returned with the small-sample
/// factor (1 + 0.75/n + 2.25/n^2); otherwise N(mean, sd^2) is taken as given.
double anderson_darling(std::vector<double> x, bool estimate = true, double mean = 0.0,
                        double sd = 1.0);
/// 5% critical value for the statistic above.
double anderson_darling_critical_5pct(bool estimate = true);

double normal_cdf(double x);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};
MeanSe mean_se(const std::vector<double>& x);

}  // namespace gaussperc::stats
