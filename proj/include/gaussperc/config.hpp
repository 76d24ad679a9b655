#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gaussperc/kernels.hpp"
#include "gaussperc/percolation.hpp"

namespace gaussperc {

/// Experiment description read from an INI file. Sections and keys:
///
///   [experiment] kind, seed, threads
///   [kernel]     family, alpha, gamma, dim, join_radius
///   [event]      kind, levels, radii, r_in, rho
///   [sampling]   h, trials, method (naive|is|is_rb), directions, amplitude,
///                level_target, padding, window
///   [fit]        model (power|power_over_log|log_power), offset,
///                max_rel_se, exclude_smallest
///   [capacity]   domain (segment|box|ball|condensed|balls), R, n, cell,
///                alphas, tol, s, r, centers
///   [covariance] lags, window
///   [correlation] eps, R0, R_max, refine_steps
///
/// Lists are separated by spaces or commas; `centers` is a list of x:y
/// pairs. Unknown sections or keys are rejected.
struct ExperimentConfig {
  std::string kind;
  std::uint64_t seed = 1;
  unsigned threads = 1;

  KernelSpec kernel;

  EventKind event = EventKind::Arm;
  std::vector<double> levels{-1.0};
  std::vector<double> radii{16.0};
  double r_in = 0.0;
  double rho = 0.25;

  double h = 0.25;
  std::size_t trials = 1000;
  std::string method = "naive";
  int directions = 1;
  std::optional<double> amplitude;
  double level_target = 0.0;
  double padding = 4.0;
  double window = 32.0;  // sample: half-width of the centred window

  std::string fit_model = "power";
  bool fit_offset = false;
  double max_rel_se = 0.3;
  bool exclude_smallest = true;

  std::string domain = "segment";
  double cap_R = 1.0;
  std::size_t cap_n = 512;
  double cell = 0.25;
  std::vector<double> alphas;
  double cap_tol = 1e-6;
  double s = 1.0;
  double r = 2.0;
  std::vector<Point> centers;

  std::vector<double> lags{0.0, 1.0, 2.0, 4.0, 8.0};

  double eps = 0.1;
  double R0 = 2.0;
  double R_max = 256.0;
  int refine_steps = 3;
};

/// Kinds accepted in [experiment] kind.
const std::vector<std::string>& experiment_kinds();

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
/// Throws ConfigError on invalid combinations.
void validate(const ExperimentConfig& c);

}  // namespace gaussperc
