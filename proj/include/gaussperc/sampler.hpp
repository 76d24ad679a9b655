#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gaussperc/capacity.hpp"
#include "gaussperc/kernels.hpp"
#include "gaussperc/stats.hpp"

namespace gaussperc {

/// Regular lattice window. Storage is C order with axis 0 (x) fastest:
/// index = i0 + n0 (i1 + n1 i2).
struct Grid {
  int dim = 2;
  std::array<std::size_t, 3> n{1, 1, 1};
  double h = 0.25;
  Point origin{0.0, 0.0, 0.0};

  std::size_t size() const { return n[0] * n[1] * n[2]; }
  std::size_t index(std::size_t i0, std::size_t i1 = 0, std::size_t i2 = 0) const {
    return i0 + n[0] * (i1 + n[1] * i2);
  }
  std::array<std::size_t, 3> multi_index(std::size_t idx) const;
  Point coord(std::size_t idx) const;
  double extent(int axis) const { return static_cast<double>(n[axis] - 1) * h; }
  bool operator==(const Grid& o) const {
    return dim == o.dim && n == o.n && h == o.h && origin == o.origin;
  }
};

/// Window [origin, origin + extent]^dim; extent/h must be an integer.
Grid make_grid(int dim, double extent, double h, const Point& origin = {0.0, 0.0, 0.0});
/// Window centred at 0: [-half_width, half_width]^dim.
Grid centered_grid(int dim, double half_width, double h);

struct Provenance {
  std::string method;
  std::string kernel_id;
  double L = 0.0;  // 0 when not decomposed
  std::string part;
  double clipped_mass = 0.0;
  std::array<std::size_t, 3> torus{1, 1, 1};
  std::vector<std::string> warnings;
};

struct GridField {
  Grid grid;
  std::vector<double> values;
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;
  Provenance provenance;
};

struct SamplerOptions {
  double padding = 4.0;
  std::size_t dense_max_points = 4096;
  bool force_spectral = false;
  std::size_t max_torus_points = std::size_t(1) << 25;
  double clip_warn = 1e-3;
};

/// Smallest 5-smooth integer >= n.
std::size_t nice_fft_size(std::size_t n);

/// Stationary Gaussian sampler for one (kernel, grid) pair. Spectral
/// synthesis on a padded torus, or a dense symmetric square root for small
/// windows. Trial t of the spectral path is the real (t even) or imaginary
/// (t odd) part of one complex synthesis driven by stream(seed, t/2); the
/// dense path uses stream(seed, t).
class FieldSampler {
 public:
  FieldSampler(const Kernel& k, const Grid& g, const SamplerOptions& opts = {});
  ~FieldSampler();
  FieldSampler(const FieldSampler&) = delete;
  FieldSampler& operator=(const FieldSampler&) = delete;

  GridField sample(std::uint64_t seed, std::uint64_t trial) const;
  /// Trials 2p and 2p+1 (spectral) or 2p, 2p+1 drawn separately (dense).
  std::pair<GridField, GridField> sample_pair(std::uint64_t seed, std::uint64_t pair) const;

  /// (C m) on the window, where C is the covariance actually sampled.
  std::vector<double> apply_covariance(const std::vector<double>& m) const;

  const Grid& grid() const { return grid_; }
  bool dense() const { return dense_; }
  double clipped_mass() const { return clipped_; }
  const Kernel& kernel() const { return kernel_; }
  const std::array<std::size_t, 3>& torus() const { return torus_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  struct Fft;
  Kernel kernel_;
  Grid grid_;
  SamplerOptions opts_;
  bool dense_ = false;
  double clipped_ = 0.0;
  std::array<std::size_t, 3> torus_{1, 1, 1};
  std::vector<std::string> warnings_;
  std::vector<double> sqrt_lambda_;  // sqrt(lambda+ / N), torus order
  std::vector<double> lambda_;       // lambda+ / N
  Eigen::MatrixXd root_;             // dense symmetric square root
  std::unique_ptr<Fft> fft_;

  Provenance make_provenance(const std::string& part) const;
  void spectral_pair(std::uint64_t seed, std::uint64_t pair, std::vector<double>& re,
                     std::vector<double>& im) const;
};

GridField sample_field(const Kernel& k, const Grid& g, std::uint64_t seed,
                       const SamplerOptions& opts = {});

/// Moving-average sampler f = q * W on a lattice: stencil q(h|k|) h^{d/2}
/// truncated at the support radius, convolved by FFT with white noise on a
/// torus at least window + 2 support wide.
class MovingAverageSampler {
 public:
  MovingAverageSampler(const MovingAverageKernel& ma, const Grid& g,
                       const SamplerOptions& opts = {});
  ~MovingAverageSampler();
  MovingAverageSampler(const MovingAverageSampler&) = delete;
  MovingAverageSampler& operator=(const MovingAverageSampler&) = delete;

  GridField sample(std::uint64_t seed, std::uint64_t trial) const;

  struct Split {
    GridField f;
    GridField f_L;
    GridField g_L;
  };
  /// f_L = q_L * W, g_L = (q - q_L) * W from the same noise, with
  /// q_L = q phi(|x|/L). Outputs are rounded to multiples of 2^-40, which
  /// makes g_L = f - f_L exact and f_L + g_L == f bit for bit.
  Split split(double L, std::uint64_t seed, std::uint64_t trial) const;

  const Grid& grid() const { return grid_; }
  double discarded_mass() const { return discarded_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  struct Fft;
  MovingAverageKernel ma_;
  Grid grid_;
  SamplerOptions opts_;
  std::array<std::size_t, 3> torus_{1, 1, 1};
  std::vector<std::complex<double>> stencil_hat_;
  double discarded_ = 0.0;
  std::vector<std::string> warnings_;
  std::unique_ptr<Fft> fft_;

  std::vector<std::complex<double>> stencil_transform(double L) const;
  std::vector<std::complex<double>> noise_transform(std::uint64_t seed, std::uint64_t pair) const;
  std::vector<double> convolve(const std::vector<std::complex<double>>& stencil_hat,
                               const std::vector<std::complex<double>>& noise_hat,
                               int part) const;
  Provenance make_provenance(const std::string& part, double L) const;
};

GridField sample_moving_average(const MovingAverageKernel& ma, const Grid& g, std::uint64_t seed,
                                const SamplerOptions& opts = {});
std::pair<GridField, GridField> local_global_split(const MovingAverageKernel& ma, double L,
                                                   const Grid& g, std::uint64_t seed,
                                                   const SamplerOptions& opts = {});

/// Smooth cutoff: 1 on [0, 1/4], 0 on [1/2, inf), C^infinity in between.
double cutoff_phi(double x);

/// Point-mass shift m = direction * amplitude * Cap * w placed on grid
/// points; the tilt adds h = C m to the field.
struct ShiftSpec {
  std::vector<std::size_t> points;
  std::vector<double> weights;
  double capacity = 0.0;
  double amplitude = 0.0;
  int direction = -1;
  std::string description;
};

/// Rejects non-converged capacity results.
ShiftSpec make_shift(const CapacityResult& cap, const std::vector<std::size_t>& points,
                     double amplitude, int direction, const std::string& description);

struct TiltedSample {
  GridField field;
  double log_weight = 0.0;
  std::string shift_spec;
};

/// Precomputed Cameron-Martin shift for one sampler.
class Tilt {
 public:
  Tilt(const FieldSampler& sampler, const ShiftSpec& spec);
  /// f + h with log_weight = -<m, f + h> + |h|_H^2 / 2.
  TiltedSample apply(GridField f) const;
  /// log dP/dQ at an already shifted field.
  double log_weight(const std::vector<double>& shifted) const;
  const std::vector<double>& shift() const { return h_; }
  /// |h|_H^2 = m^T C m.
  double norm2() const { return norm2_; }
  const ShiftSpec& spec() const { return spec_; }

 private:
  ShiftSpec spec_;
  std::vector<double> m_;
  std::vector<double> h_;
  double norm2_ = 0.0;
};

TiltedSample cameron_martin_tilt(const FieldSampler& sampler, const ShiftSpec& spec,
                                 std::uint64_t seed, std::uint64_t trial);

/// Lag in lattice steps per axis.
using Lag = std::array<long, 3>;

/// Translation-averaged E[f(x) f(x + lag)] (mean known to be zero) per
/// field, then mean and standard error across fields.
std::vector<stats::MeanSe> empirical_covariance(const std::vector<GridField>& fields,
                                                const std::vector<Lag>& lags);

/// Accumulating variant for long runs: add fields one at a time.
class CovarianceAccumulator {
 public:
  CovarianceAccumulator(const Grid& g, std::vector<Lag> lags);
  void add(const GridField& f);
  std::vector<stats::MeanSe> result() const;
  std::size_t count() const { return per_field_.empty() ? 0 : per_field_[0].size(); }

 private:
  Grid grid_;
  std::vector<Lag> lags_;
  std::vector<std::vector<double>> per_field_;
};

}  // namespace gaussperc
