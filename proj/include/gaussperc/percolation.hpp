#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gaussperc/capacity.hpp"
#include "gaussperc/sampler.hpp"
#include "gaussperc/stats.hpp"

namespace gaussperc {

/// Arm: origin cell (or B(r_in)) to the sphere of radius R.
/// Ann: crossing of B(2R) \ B(R); AnnInf is the sup-norm version.
/// Cross: left-right crossing of [0,R]^d. Tube: [0,R] x [0,R^rho]^(d-1).
enum class EventKind { Arm, Ann, AnnInf, Cross, Tube };
std::string to_string(EventKind k);
EventKind event_from_string(const std::string& s);

struct EventSpec {
  EventKind kind = EventKind::Arm;
  double level = 0.0;
  double R = 16.0;
  double r_in = 0.0;
  double rho = 0.25;
};

/// Smallest window holding the event: centred for Arm/Ann, [0,R]^d for
/// Cross and [0,R] x [0,R^rho] for Tube.
Grid event_window(const EventSpec& e, int dim, double h);

/// Lattice realisation of an event: cells of the allowed domain and the two
/// terminal sets (linear grid indices, ascending).
struct EventGeometry {
  std::vector<std::uint8_t> domain;
  std::vector<std::size_t> source;
  std::vector<std::size_t> target;
};
EventGeometry event_geometry(const Grid& g, const EventSpec& e);

/// Sub-level components under face adjacency. label[i] = -1 outside the
/// set; ids are contiguous from 0 and ordered by the smallest linear index
/// in each component.
struct ComponentLabeling {
  Grid grid;
  std::vector<std::int32_t> label;
  std::size_t count = 0;
  std::vector<std::size_t> sizes;
  /// per component: lo/hi multi-index corners of the bounding box
  std::vector<std::array<std::size_t, 3>> box_lo, box_hi;
};

ComponentLabeling label_mask(const Grid& g, const std::vector<std::uint8_t>& mask);
/// Components of {f <= level}, optionally restricted to a domain mask.
ComponentLabeling excursion_components(const GridField& f, double level,
                                       const std::vector<std::uint8_t>* domain = nullptr);

/// True iff one component meets both terminal sets.
bool detect_event(const ComponentLabeling& lab, const EventGeometry& geo);
/// Same answer without a full labeling: BFS from the source set.
bool event_occurs(const GridField& f, const EventGeometry& geo, double level);
bool detect_event(const GridField& f, const EventSpec& e);

/// Smallest level at which the event occurs (minimax path value), +inf if
/// the terminal sets are not connected inside the domain at any level.
double event_threshold(const GridField& f, const EventGeometry& geo);
/// Arm thresholds for several outer radii from one field; the window must
/// contain B(max radius).
std::vector<double> arm_thresholds(const GridField& f, const std::vector<double>& radii,
                                   double r_in = 0.0);

/// Euclidean diameter of each component's cell-centre set.
std::vector<double> component_diameters(const ComponentLabeling& lab);
double largest_diameter(const ComponentLabeling& lab);

struct Estimate {
  EventSpec event;
  std::string method;  // "naive" or "is"
  std::size_t trials = 0;
  double weighted_sum = 0.0;
  double p_hat = 0.0;
  double se = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double ess = 0.0;
  bool reliable = true;
  std::uint64_t seed = 0;
  double amplitude = 0.0;
  std::vector<std::string> warnings;
};

struct McOptions {
  SamplerOptions sampler;
  unsigned threads = 1;
};

/// Naive Monte Carlo with a Wilson interval; trial t uses sample(seed, t).
Estimate mc_estimate(const Kernel& k, const Grid& g, const EventSpec& e, std::size_t trials,
                     std::uint64_t seed, const McOptions& opts = {});
/// Coupled levels: one field per trial, every level evaluated on it.
std::vector<Estimate> mc_estimate_levels(const Kernel& k, const Grid& g, const EventSpec& e,
                                         const std::vector<double>& levels, std::size_t trials,
                                         std::uint64_t seed, const McOptions& opts = {});
/// Coupled radii for Arm: one field on B(max R) per trial.
std::vector<Estimate> mc_estimate_arm_radii(const Kernel& k, double h, double level,
                                            const std::vector<double>& radii,
                                            std::size_t trials, std::uint64_t seed,
                                            const McOptions& opts = {});

struct IsOptions {
  /// shift target level; the amplitude defaults to level_target - level
  double level_target = 0.0;
  std::optional<double> amplitude;
  /// shift domain as grid indices; default is the straight segment joining
  /// the event's terminal sets
  std::vector<std::size_t> shift_points;
  CapacityOptions capacity;
  double min_ess = 30.0;
  /// Arm/Ann only: equal mixture of the default segment rotated to this
  /// many lattice directions (1, 2, 4 or 8); trial t uses direction t mod J
  int directions = 1;
  /// Integrate the tilt coordinate Z = <mu, f> out exactly: the event is
  /// decreasing in Z given the independent remainder, so each trial
  /// contributes P[Z <= z*]. Unbiased for any amplitude; requires a
  /// positive profile C mu on the event domain.
  bool rao_blackwell = false;
};

/// Grid points of the default straight shift segment for an event, rotated
/// to lattice direction `direction` of `directions` (axes and diagonals).
std::vector<std::size_t> default_shift_points(const Grid& g, const EventSpec& e,
                                              int direction = 0, int directions = 1);
/// Equilibrium shift on the given grid points. Evenly spaced collinear
/// points become intervals along their line, anything else squares of side h.
ShiftSpec shift_for_points(const Kernel& k, const Grid& g, const std::vector<std::size_t>& pts,
                           double amplitude, int direction, const CapacityOptions& copts);

/// Importance sampling by a Cameron-Martin tilt pushing the field down on
/// the shift domain. Normal interval on the weighted mean; ESS below
/// min_ess flags the estimate unreliable.
Estimate is_estimate(const Kernel& k, const Grid& g, const EventSpec& e, std::size_t trials,
                     std::uint64_t seed, const IsOptions& is = {}, const McOptions& opts = {});

/// E[e^{log_weight}] over tilted draws (should be 1).
stats::MeanSe tilt_weight_mean(const FieldSampler& s, const ShiftSpec& spec, std::size_t trials,
                               std::uint64_t seed);

struct CorrelationLengthOptions {
  double eps = 0.1;
  double h = 0.25;
  double R0 = 2.0;
  double R_max = 256.0;
  std::size_t trials = 1000;
  int refine_steps = 3;
  McOptions mc;
};

struct CorrelationLengthRow {
  double level = 0.0;
  double xi = 0.0;
  bool censored = false;
  double R_lo = 0.0;  // largest tested R that failed
  double R_hi = 0.0;  // smallest tested R that passed
  Estimate at_xi;
};

/// xi(level) = smallest tested R with Wilson upper bound of P[Cross] below
/// eps: doubling from R0, then binary refinement. Levels share samples at
/// every tested R.
std::vector<CorrelationLengthRow> correlation_length(const Kernel& k,
                                                     const std::vector<double>& levels,
                                                     std::uint64_t seed,
                                                     const CorrelationLengthOptions& opts = {});

}  // namespace gaussperc
