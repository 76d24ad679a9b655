#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gaussperc/kernels.hpp"

namespace gaussperc {

using Point = std::array<double, 3>;

enum class DomainKind { Segment, Box, Ball, UnionOfBalls, CondensedSegment };
std::string to_string(DomainKind k);

/// Axis-aligned cell: interval on the x-axis (dim 1) or square in the
/// xy-plane (dim 2). A zero half-width makes the cell a point atom.
struct Cell {
  Point center{0.0, 0.0, 0.0};
  double half = 0.0;
};

struct DiscretizedDomain {
  DomainKind kind = DomainKind::Segment;
  int cell_dim = 1;
  std::vector<Cell> cells;
  double cell_size = 0.0;
  std::map<std::string, double> params;

  std::size_t size() const { return cells.size(); }
};

/// [0, R] split into n equal cells.
DiscretizedDomain segment_domain(double R, std::size_t n);
/// [0, R] with cell size <= max_cell (at least two cells).
DiscretizedDomain segment_domain_max_cell(double R, double max_cell);
/// S_{s,r,R}: segments i r + [0, s] for 1 <= i < floor(R/r), cells <= max_cell.
DiscretizedDomain condensed_segment(double s, double r, double R, double max_cell = 0.25);
/// [0, a]^2 in square cells of side <= cell.
DiscretizedDomain box_domain(double a, double cell);
/// Lattice squares whose centres lie in B(center, radius).
DiscretizedDomain ball_domain(const Point& center, double radius, double cell);
DiscretizedDomain union_of_balls(double s, const std::vector<Point>& centers, double cell);

struct DiscreteMeasure {
  std::vector<double> weights;
  const DiscretizedDomain* domain = nullptr;
};
DiscreteMeasure uniform_measure(const DiscretizedDomain& d);

/// Cell-averaged kernel between two cells.
double cell_average(const Kernel& k, const Cell& a, const Cell& b, int cell_dim);
/// Cell-averaged Gram matrix.
Eigen::MatrixXd gram_matrix(const DiscretizedDomain& d, const Kernel& k);

double energy(const DiscreteMeasure& m, const Kernel& k);
double energy(const Eigen::VectorXd& w, const Eigen::MatrixXd& gram);

struct CapacityOptions {
  double tol = 1e-6;
  // 0 means 200 n
  std::size_t max_iter = 0;
  // fully corrective solve on the support every this many iterations
  std::size_t corrective_every = 200;
};

struct CapacityResult {
  double capacity = 0.0;
  double energy = 0.0;
  std::vector<double> weights;
  /// min over the support (w_i > 1e-6) of the cell-averaged potential h.
  double potential_min_on_support = 0.0;
  /// min over all cells of h.
  double potential_min = 0.0;
  /// relative Frank-Wolfe gap 2 (E - min_i (Aw)_i) / E.
  double duality_gap = 0.0;
  /// ||h||^2 / (min_D h)^2, an upper bound on the capacity.
  double capacity_upper = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t n = 0;
  double cell_size = 0.0;
  /// cell-averaged potential h_i = Cap (A w)_i
  std::vector<double> potential;
};

CapacityResult capacity(const DiscretizedDomain& d, const Kernel& k,
                        const CapacityOptions& opts = {});
/// Solve on a precomputed Gram matrix.
CapacityResult capacity_from_gram(const Eigen::MatrixXd& gram, const CapacityOptions& opts = {});

/// h(x) = Cap sum_i w_i Kbar(x, cell_i). Points inside a domain cell get the
/// cell-averaged value of that cell; other points average K over each cell.
std::vector<double> dual_potential(const CapacityResult& res, const DiscretizedDomain& d,
                                   const Kernel& k, const std::vector<Point>& points);

/// (1/pi) B((1+a)/2, (1+a)/2) cos(pi a / 2).
double c_alpha(double alpha);

/// Closed-form line-segment asymptote of Cap([0, R]).
double capacity_asymptote(const Kernel& k, double R);

/// (x(1-x))^{(a-1)/2} / B((1+a)/2, (1+a)/2); +infinity at x in {0, 1}.
double riesz_equilibrium_density(double alpha, double x);
/// CDF of Beta((1+a)/2, (1+a)/2).
double riesz_equilibrium_cdf(double alpha, double x);

struct ProjectionResult {
  double cap_balls = 0.0;
  /// capacity of the same balls moved onto the line at centres i r
  double cap_condensed = 0.0;
  double ratio = 0.0;
  /// capacity of the projected segments i r + [0, s], i = 1..n
  double cap_segments = 0.0;
  double ratio_segments = 0.0;
};

ProjectionResult projection_compare(const Kernel& k, double s, const std::vector<Point>& centers,
                                    double r, double cell, const CapacityOptions& opts = {});

/// Kolmogorov-Smirnov distance between the discrete CDF of a measure on a
/// segment domain of [0, R] (rescaled to [0,1]) and the Beta law.
double ks_distance_to_beta(const CapacityResult& res, const DiscretizedDomain& d, double alpha);

}  // namespace gaussperc
