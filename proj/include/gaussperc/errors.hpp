#pragma once

#include <stdexcept>
#include <string>

namespace gaussperc {

/// Precondition violated: parameter outside its admissible range.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Kernel evaluated at a point where it is infinite (Riesz at r = 0).
class SingularityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Quadrature, factorization or iteration failed to reach its tolerance.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double residual = 0.0)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Memory or size budget exceeded.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gaussperc
