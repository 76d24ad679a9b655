#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace gaussperc {

enum class KernelFamily { Cauchy, Riesz, LogCorrelated, Custom };

std::string to_string(KernelFamily f);
KernelFamily family_from_string(const std::string& name);

/// Laplace-type representation K(r) = \int_0^\infty e^{-s r^2} v(s) ds.
struct ScaleMixture {
  int dim = 2;
  double alpha = 0.0;
  std::function<double(double)> v;
  // numeric support of v (s variable) and of w (t variable)
  double s_min = 0.0;
  double s_max = 0.0;
  double t_min = 0.0;
  double t_max = 0.0;

  /// w(t) = (1/2) pi^{-d/2} t^{-d-3} v(1/(4 t^2)).
  double w(double t) const;
};

/// Isotropic covariance kernel. Cheap to copy; immutable after construction.
class Kernel {
 public:
  struct Model;

  Kernel() = default;
  explicit Kernel(std::shared_ptr<const Model> m) : m_(std::move(m)) {}

  KernelFamily family() const;
  double alpha() const;
  /// Log exponent; NaN when the family has none.
  double gamma() const;
  int dim() const;
  /// Variance K(0); empty for singular kernels.
  std::optional<double> k0() const;
  bool samplable() const { return k0().has_value(); }
  /// Short identifier such as "cauchy(alpha=0.5,d=2)".
  const std::string& id() const;

  /// K(r), r >= 0. Riesz throws SingularityError at r = 0.
  double operator()(double r) const;

  const std::optional<ScaleMixture>& scale_mixture() const;

  /// Join radius and q-normalisation of the log-correlated construction
  /// (NaN for other families).
  double join_radius() const;
  double normalization() const;

  /// Convolution root for the log-correlated family (q with K = q * q).
  /// Empty for the other families.
  const std::function<double(double)>& root() const;

  bool valid() const { return static_cast<bool>(m_); }

 private:
  std::shared_ptr<const Model> m_;
};

struct Kernel::Model {
  KernelFamily family = KernelFamily::Custom;
  double alpha = 0.0;
  double gamma = 0.0;
  int dim = 2;
  std::optional<double> k0;
  std::string id;
  std::function<double(double)> eval;
  std::optional<ScaleMixture> mixture;
  double join_radius = 0.0;
  double normalization = 0.0;
  std::function<double(double)> root;
};

Kernel make_cauchy(double alpha, int dim);
Kernel make_riesz(double alpha, int dim);
/// q(x) = A x^{-1} (log x)^{-(gamma+1)/2} for x >= join_radius with a C^2
/// cubic cap below; A chosen so that K(1e4) (log 1e4)^gamma = 1.
Kernel make_log_kernel(double gamma, int dim, double join_radius = 2.0);
Kernel make_custom_kernel(const std::string& name, int dim, double alpha,
                          std::function<double(double)> eval,
                          std::optional<double> k0);

/// Config block: family = cauchy|riesz|log, alpha, gamma, dim, join_radius.
struct KernelSpec {
  std::string family = "cauchy";
  double alpha = 0.5;
  double gamma = 1.0;
  int dim = 2;
  double join_radius = 2.0;
};
Kernel make_kernel(const KernelSpec& spec);

struct TauberianConstants {
  double c_prime = 0.0;
  double c_doubleprime = 0.0;
};

/// c'_{d,alpha} and c''_{d,alpha}. For alpha = 0 only d = 2 is defined.
TauberianConstants tauberian_constants(int dim, double alpha, double gamma = 1.0);

/// c~(beta, nu) = 2^{1-beta} Gamma(1 - beta/2 + nu/2) / Gamma(beta/2 + nu/2).
double tilde_c(double beta, double nu);

/// r^alpha K(r).
double slowly_varying_part(const Kernel& k, double r);

/// \int_0^\infty e^{-s r^2} v(s) ds by adaptive quadrature in u = log s.
double reconstruct_from_mixture(const ScaleMixture& mix, double r,
                                double quad_tol = 1e-12);

/// Same integral written in the t variable:
/// \int_0^\infty w(t) pi^{d/2} t^d e^{-r^2/(4 t^2)} dt.
double reconstruct_from_w(const ScaleMixture& mix, double r,
                          double quad_tol = 1e-12);

/// Tabulated convolution root q with q * q ~ K, truncated at support_radius.
class MovingAverageKernel {
 public:
  MovingAverageKernel(int dim, std::function<double(double)> q,
                      double support_radius, double normalization,
                      double total_mass, std::string kernel_id);

  /// q(r) for r < support_radius, 0 beyond.
  double operator()(double r) const;
  int dim() const { return dim_; }
  double support_radius() const { return support_; }
  double normalization() const { return normalization_; }
  /// \int q^2 over R^d before truncation (equals K(0)).
  double total_mass() const { return total_mass_; }
  /// Fraction of \int q^2 lying beyond the support radius.
  double discarded_mass() const;
  const std::string& kernel_id() const { return id_; }
  /// Same root multiplied by c.
  MovingAverageKernel scaled(double c) const;

 private:
  int dim_;
  std::function<double(double)> q_;
  double support_;
  double normalization_;
  double total_mass_;
  std::string id_;
  double scale_ = 1.0;
};

/// Root from a radial spectral density (transform convention
/// \int g(x) e^{-i lambda.x} dx): q = F^{-1}[sqrt(rho)], tabulated on
/// [0, support] with spacing dr.
MovingAverageKernel make_moving_average_from_spectrum(
    int dim, const std::function<double(double)>& sqrt_rho, double lambda_max,
    double support_radius, double total_mass, const std::string& id,
    double dr = 1.0 / 16.0);

/// Cauchy: Hankel inversion of the closed-form spectral density.
/// LogCorrelated: its defining root. Others: DomainError.
MovingAverageKernel make_moving_average(const Kernel& k, double support_radius);

/// Closed-form spectral density of the Cauchy kernel.
double cauchy_spectral_density(double alpha, int dim, double lambda);

}  // namespace gaussperc
