#pragma once

#include <functional>
#include <vector>

namespace gaussperc::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;
};

/// Adaptive 61-point Gauss-Kronrod on [a, b]; either end may be infinite.
/// Throws NumericError carrying the error estimate when the relative
/// tolerance is not met.
Result integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-10, unsigned max_depth = 18);

/// Same as integrate() but never throws; callers inspect `error`.
Result integrate_unchecked(const std::function<double(double)>& f, double a,
                           double b, double rel_tol = 1e-10,
                           unsigned max_depth = 18);

/// Gauss-Legendre nodes/weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussLegendre& gauss_legendre(int n);

}  // namespace gaussperc::quad
