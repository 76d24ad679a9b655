#include "gaussperc/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "gaussperc/errors.hpp"

namespace gaussperc::quad {

Result integrate_unchecked(const std::function<double(double)>& f, double a,
                           double b, double rel_tol, unsigned max_depth) {
  double error = 0.0;
  double l1 = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, a, b, max_depth, rel_tol, &error, &l1);
  return {value, error};
}

Result integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol, unsigned max_depth) {
  Result r = integrate_unchecked(f, a, b, rel_tol, max_depth);
  if (!std::isfinite(r.value) || r.error > 10.0 * rel_tol * std::max(std::abs(r.value), 1e-300)) {
    // Tiny absolute values with relative failure are fine for the callers
    // here, which always combine pieces of an O(1) quantity.
    if (!std::isfinite(r.value) || r.error > 1e-13) {
      std::ostringstream msg;
      msg << "quadrature on [" << a << ", " << b << "] did not converge: value "
          << r.value << ", error estimate " << r.error;
      throw NumericError(msg.str(), r.error);
    }
  }
  return r;
}

namespace {

GaussLegendre compute_gauss_legendre(int n) {
  GaussLegendre gl;
  gl.nodes.resize(n);
  gl.weights.resize(n);
  // Newton iteration on Legendre polynomials from the Chebyshev guess.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    if (n == 1) {
      x = 0.0;
      dp = 1.0;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    gl.nodes[i] = -x;
    gl.nodes[n - 1 - i] = x;
    gl.weights[i] = n == 1 ? 2.0 : w;
    gl.weights[n - 1 - i] = n == 1 ? 2.0 : w;
  }
  return gl;
}

}  // namespace

const GaussLegendre& gauss_legendre(int n) {
  static std::mutex mutex;
  static std::map<int, GaussLegendre> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
  return it->second;
}

}  // namespace gaussperc::quad
