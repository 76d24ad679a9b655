#pragma once

#include <string>
#include <vector>

#include "gaussperc/config.hpp"
#include "gaussperc/percolation.hpp"
#include "gaussperc/report.hpp"

namespace gaussperc {

/// -log P against power R^beta, power-over-log (R / log R)^beta or
/// log-power (log R)^beta.
enum class RateModel { Power, PowerOverLog, LogPower };
std::string to_string(RateModel m);
RateModel rate_model_from_string(const std::string& s);
double rate_feature(RateModel m, double R);

struct RatePoint {
  double R = 0.0;
  double p_hat = 0.0;
  double se = 0.0;
};

struct FitOptions {
  /// fit y = b + C x^beta instead of y = C x^beta
  bool offset = false;
  double max_rel_se = 0.3;
  bool exclude_smallest = true;
  std::size_t min_points = 4;
};

struct RateFit {
  RateModel model = RateModel::Power;
  bool offset = false;
  double exponent = 0.0;
  double exponent_se = 0.0;
  double constant = 0.0;
  double constant_se = 0.0;
  double offset_value = 0.0;
  double offset_se = 0.0;
  std::vector<double> R_used;
  /// standardized residuals (y - model) / sd(y)
  std::vector<double> residuals;
  double chi2 = 0.0;
  std::size_t dof = 0;
};

/// Weighted least squares on y = -log p_hat with sd(y) = se / p_hat (delta
/// method). Without offset the fit is linear in log y vs log x; with an
/// offset it is solved by Levenberg-Marquardt. Points with se/p_hat above
/// max_rel_se (or p_hat = 0) are dropped, then the smallest R if requested.
/// Throws DomainError when fewer than min_points remain.
RateFit fit_decay_rate(const std::vector<RatePoint>& pts, RateModel model,
                       const FitOptions& opts = {});

struct DiameterRow {
  double R = 0.0;
  double level = 0.0;
  std::size_t trials = 0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  /// median over the growth scale: (log R)^{1/alpha} for alpha < 1,
  /// log R log log R at alpha = 1, log R otherwise
  double ratio = 0.0;
  /// limiting value of the ratio where known, NaN otherwise
  double limit = 0.0;
};

double diameter_scale(double alpha, double R);

/// Largest component diameter of {f <= level} inside B(R). One field on
/// B(max R) per trial; smaller radii restrict the same field, so medians
/// are nondecreasing in R.
std::vector<DiameterRow> diameter_experiment(const Kernel& k, double h,
                                             const std::vector<double>& radii,
                                             const std::vector<double>& levels,
                                             std::size_t trials, std::uint64_t seed,
                                             const McOptions& opts = {});

struct RunStatus {
  int exit_code = 0;
  std::size_t jobs = 0;
  std::size_t failures = 0;
  std::vector<std::string> files;
};

/// Runs the experiment and writes its report into out_dir. `command` is
/// the CLI subcommand; it fixes the default kind and rejects kinds that
/// belong to another subcommand.
RunStatus run_config(const ExperimentConfig& c, const std::string& command,
                     const std::string& out_dir);

}  // namespace gaussperc
