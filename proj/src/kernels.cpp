#include "gaussperc/kernels.hpp"

#include <algorithm>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "gaussperc/errors.hpp"
#include "gaussperc/quadrature.hpp"

namespace gaussperc {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double nan = std::numeric_limits<double>::quiet_NaN();

using Spline = boost::math::interpolators::cardinal_cubic_b_spline<double>;

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(6);
  s << x;
  return s.str();
}

// surface area of the unit sphere in R^d
double sphere_area(int d) { return 2.0 * std::pow(pi, 0.5 * d) / std::tgamma(0.5 * d); }

}  // namespace

std::string to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::Cauchy: return "cauchy";
    case KernelFamily::Riesz: return "riesz";
    case KernelFamily::LogCorrelated: return "log";
    case KernelFamily::Custom: return "custom";
  }
  return "custom";
}

KernelFamily family_from_string(const std::string& name) {
  if (name == "cauchy") return KernelFamily::Cauchy;
  if (name == "riesz") return KernelFamily::Riesz;
  if (name == "log" || name == "logcorrelated" || name == "log_correlated")
    return KernelFamily::LogCorrelated;
  if (name == "custom") return KernelFamily::Custom;
  throw ConfigError("unknown kernel family '" + name + "'");
}

double ScaleMixture::w(double t) const {
  if (t <= 0.0) return 0.0;
  return 0.5 * std::pow(pi, -0.5 * dim) * std::pow(t, -dim - 3.0) * v(1.0 / (4.0 * t * t));
}

KernelFamily Kernel::family() const { return m_->family; }
double Kernel::alpha() const { return m_->alpha; }
double Kernel::gamma() const { return m_->gamma; }
int Kernel::dim() const { return m_->dim; }
std::optional<double> Kernel::k0() const { return m_->k0; }
const std::string& Kernel::id() const { return m_->id; }
double Kernel::operator()(double r) const { return m_->eval(r); }
const std::optional<ScaleMixture>& Kernel::scale_mixture() const { return m_->mixture; }
double Kernel::join_radius() const { return m_->join_radius; }
double Kernel::normalization() const { return m_->normalization; }
const std::function<double(double)>& Kernel::root() const { return m_->root; }

Kernel make_cauchy(double alpha, int dim) {
  if (dim < 1) throw DomainError("dimension must be >= 1");
  if (!(alpha > 0.0 && alpha < dim))
    throw DomainError("Cauchy kernel needs 0 < alpha < d, got alpha = " + fmt(alpha));
  auto m = std::make_shared<Kernel::Model>();
  m->family = KernelFamily::Cauchy;
  m->alpha = alpha;
  m->gamma = nan;
  m->dim = dim;
  m->k0 = 1.0;
  m->id = "cauchy(alpha=" + fmt(alpha) + ",d=" + std::to_string(dim) + ")";
  m->eval = [alpha](double r) { return std::pow(1.0 + r * r, -0.5 * alpha); };
  const double g = std::tgamma(0.5 * alpha);
  ScaleMixture mix;
  mix.dim = dim;
  mix.alpha = alpha;
  mix.v = [alpha, g](double s) {
    if (s <= 0.0) return 0.0;
    return std::pow(s, 0.5 * alpha - 1.0) * std::exp(-s) / g;
  };
  mix.s_min = 0.0;
  mix.s_max = std::numeric_limits<double>::infinity();
  mix.t_min = 0.0;
  mix.t_max = std::numeric_limits<double>::infinity();
  m->mixture = mix;
  m->join_radius = nan;
  m->normalization = nan;
  return Kernel(m);
}

Kernel make_riesz(double alpha, int dim) {
  if (dim < 1) throw DomainError("dimension must be >= 1");
  if (!(alpha > 0.0 && alpha < dim))
    throw DomainError("Riesz kernel needs 0 < alpha < d, got alpha = " + fmt(alpha));
  auto m = std::make_shared<Kernel::Model>();
  m->family = KernelFamily::Riesz;
  m->alpha = alpha;
  m->gamma = nan;
  m->dim = dim;
  m->id = "riesz(alpha=" + fmt(alpha) + ",d=" + std::to_string(dim) + ")";
  m->eval = [alpha](double r) {
    if (r <= 0.0) throw SingularityError("Riesz kernel is infinite at r = 0");
    return std::pow(r, -alpha);
  };
  const double g = std::tgamma(0.5 * alpha);
  ScaleMixture mix;
  mix.dim = dim;
  mix.alpha = alpha;
  mix.v = [alpha, g](double s) { return s <= 0.0 ? 0.0 : std::pow(s, 0.5 * alpha - 1.0) / g; };
  mix.s_max = std::numeric_limits<double>::infinity();
  mix.t_max = std::numeric_limits<double>::infinity();
  m->mixture = mix;
  m->join_radius = nan;
  m->normalization = nan;
  return Kernel(m);
}

namespace {

// Unnormalised log-correlated root: cubic cap a + b x^2 + c x^3 below R,
// x^{-1} (log x)^{-beta} above.
struct LogRoot {
  double R, beta, a, b, c;

  LogRoot(double join, double gamma) : R(join), beta(0.5 * (gamma + 1.0)) {
    const double L = std::log(R);
    const double t = 1.0 / (R * std::pow(L, beta));
    const double t1 = -t / R * (1.0 + beta / L);
    const double t2 = t / (R * R) * (2.0 + 3.0 * beta / L + beta * (beta + 1.0) / (L * L));
    c = (R * t2 - t1) / (3.0 * R * R);
    b = 0.5 * (-t2 + 2.0 * t1 / R);
    a = t - b * R * R - c * R * R * R;
  }

  double operator()(double x) const {
    if (x < R) return a + x * x * (b + c * x);
    return 1.0 / (x * std::pow(std::log(x), beta));
  }
};

// (q * q)(r) in R^2 by polar quadrature around the origin, with the
// far tail 2 pi \int_S^\infty s q(s)^2 ds done in closed form.
double log_root_convolution(const LogRoot& q, double gamma, double r) {
  auto theta = [&](double s) {
    if (r == 0.0) return 2.0 * pi * q(s);
    auto inner = [&](double th) {
      const double sn = std::sin(0.5 * th);
      const double d2 = (s - r) * (s - r) + 4.0 * s * r * sn * sn;
      return q(std::sqrt(d2));
    };
    // the integrand peaks at theta = 0 with width ~ max(|s-r|, R)/sqrt(s r);
    // geometric panels keep the adaptive rule from chasing it, and the
    // cap/tail join (distance = R) gets its own breakpoint
    const double width = std::max(std::abs(s - r), q.R) / std::sqrt(s * r);
    std::vector<double> cuts{0.0};
    for (double b = width; b < pi; b *= 2.0) cuts.push_back(b);
    if (std::abs(s - r) < q.R) {
      const double x = (q.R * q.R - (s - r) * (s - r)) / (4.0 * s * r);
      if (x < 1.0) cuts.push_back(2.0 * std::asin(std::sqrt(x)));
    }
    cuts.push_back(pi);
    std::sort(cuts.begin(), cuts.end());
    // fixed-order rule per panel so Theta(s) is a smooth function of s
    // and the outer adaptive rule is not fighting inner tolerance noise
    const auto& gl = quad::gauss_legendre(24);
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double a = cuts[i];
      const double b = cuts[i + 1];
      if (!(b > a)) continue;
      double part = 0.0;
      for (std::size_t k = 0; k < gl.nodes.size(); ++k)
        part += gl.weights[k] * inner(0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[k]);
      sum += 0.5 * (b - a) * part;
    }
    return 2.0 * sum;
  };
  auto outer = [&](double s) { return s * q(s) * theta(s); };

  const double S = 1e4 * std::max({r, q.R, 10.0});
  std::vector<double> bp{0.0, 1.0, q.R, std::abs(r - q.R), r, r + q.R, S};
  for (double f = 0.5; r * f > q.R; f *= 0.5) bp.push_back(r * f);
  // Theta(s) grows like log(r/|s-r|) on approach to s = r
  for (double g = 2.0 * q.R; g < 0.5 * r; g *= 2.0) {
    bp.push_back(r - g);
    bp.push_back(r + g);
  }
  for (double f = 2.0; r * f < S; f *= 4.0) bp.push_back(r * f);
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());

  double total = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
    const double lo = bp[i];
    const double hi = bp[i + 1];
    if (hi <= lo || hi > S) continue;
    quad::Result piece;
    if (lo >= 1.0) {
      auto g = [&](double u) {
        const double s = std::exp(u);
        return s * outer(s);
      };
      piece = quad::integrate_unchecked(g, std::log(lo), std::log(hi), 1e-9, 8);
    } else {
      piece = quad::integrate_unchecked(outer, lo, hi, 1e-9, 8);
    }
    total += piece.value;
    error += piece.error;
  }
  if (!std::isfinite(total) || error > 1e-6 * std::abs(total))
    throw NumericError("log-correlated convolution did not converge at r = " + fmt(r), error);
  // for s >= S >> r the circle average of q is q(s) up to O(r^2/s^2)
  total += 2.0 * pi * std::pow(std::log(S), -gamma) / gamma;
  return total;
}

// Tabulated K for the log-correlated family: uniform grid on [0, r_lin],
// K(r) (log r)^gamma on a uniform grid in log r up to 5e4, held constant
// beyond (the ratio tends to 1 only logarithmically slowly).
struct LogKernelTable {
  double gamma;
  double r_lin;
  double u_max;
  double y_end;
  std::shared_ptr<Spline> near;
  std::shared_ptr<Spline> far;

  double operator()(double r) const {
    if (r < 0.0) r = -r;
    if (r <= r_lin) return (*near)(r);
    const double u = std::log(r);
    const double y = u >= u_max ? y_end : (*far)(u);
    return y * std::pow(u, -gamma);
  }
};

}  // namespace

Kernel make_log_kernel(double gamma, int dim, double join_radius) {
  if (!(gamma > 0.0)) throw DomainError("log-correlated kernel needs gamma > 0");
  if (dim != 2) throw DomainError("log-correlated kernel is constructed in d = 2 only");
  if (!(join_radius >= 2.0)) throw DomainError("join_radius must be >= 2");

  const LogRoot q(join_radius, gamma);
  const double r_norm = 1e4;
  double raw_norm = 0.0;
  try {
    raw_norm = log_root_convolution(q, gamma, r_norm);
  } catch (const NumericError& e) {
    throw NumericError(std::string("log-correlated normalisation failed: ") + e.what(),
                       e.residual());
  }
  const double scale2 = 1.0 / (raw_norm * std::pow(std::log(r_norm), gamma));
  const double A = std::sqrt(scale2);

  auto table = std::make_shared<LogKernelTable>();
  table->gamma = gamma;
  table->r_lin = std::max(32.0, 8.0 * join_radius);
  const double dr = 1.0 / 8.0;
  const int n_lin = static_cast<int>(std::lround(table->r_lin / dr)) + 1;
  table->r_lin = (n_lin - 1) * dr;
  std::vector<double> near(n_lin);
  for (int i = 0; i < n_lin; ++i) near[i] = scale2 * log_root_convolution(q, gamma, i * dr);
  table->near = std::make_shared<Spline>(near.begin(), near.end(), 0.0, dr, 0.0);

  const double u0 = std::log(table->r_lin);
  const double du = 0.25;
  const int n_far = static_cast<int>(std::ceil((std::log(5e4) - u0) / du)) + 1;
  std::vector<double> far(n_far);
  for (int i = 0; i < n_far; ++i) {
    const double u = u0 + i * du;
    far[i] = scale2 * log_root_convolution(q, gamma, std::exp(u)) * std::pow(u, gamma);
  }
  table->u_max = u0 + (n_far - 1) * du;
  table->y_end = far.back();
  table->far = std::make_shared<Spline>(far.begin(), far.end(), u0, du);

  auto m = std::make_shared<Kernel::Model>();
  m->family = KernelFamily::LogCorrelated;
  m->alpha = 0.0;
  m->gamma = gamma;
  m->dim = dim;
  m->k0 = near[0];
  m->id = "log(gamma=" + fmt(gamma) + ",d=2,join=" + fmt(join_radius) + ")";
  m->eval = [table](double r) { return (*table)(r); };
  m->join_radius = join_radius;
  m->normalization = A;
  m->root = [q, A](double x) { return A * q(std::abs(x)); };
  return Kernel(m);
}

Kernel make_custom_kernel(const std::string& name, int dim, double alpha,
                          std::function<double(double)> eval, std::optional<double> k0) {
  if (dim < 1) throw DomainError("dimension must be >= 1");
  if (!(alpha >= 0.0 && alpha < dim)) throw DomainError("custom kernel needs 0 <= alpha < d");
  auto m = std::make_shared<Kernel::Model>();
  m->family = KernelFamily::Custom;
  m->alpha = alpha;
  m->gamma = nan;
  m->dim = dim;
  m->k0 = k0;
  m->id = "custom(" + name + ")";
  m->eval = std::move(eval);
  m->join_radius = nan;
  m->normalization = nan;
  return Kernel(m);
}

Kernel make_kernel(const KernelSpec& spec) {
  switch (family_from_string(spec.family)) {
    case KernelFamily::Cauchy: return make_cauchy(spec.alpha, spec.dim);
    case KernelFamily::Riesz: return make_riesz(spec.alpha, spec.dim);
    case KernelFamily::LogCorrelated:
      return make_log_kernel(spec.gamma, spec.dim, spec.join_radius);
    case KernelFamily::Custom: break;
  }
  throw ConfigError("custom kernels cannot be built from a config block");
}

double tilde_c(double beta, double nu) {
  return std::pow(2.0, 1.0 - beta) * std::tgamma(1.0 - 0.5 * beta + 0.5 * nu) /
         std::tgamma(0.5 * beta + 0.5 * nu);
}

TauberianConstants tauberian_constants(int dim, double alpha, double gamma) {
  if (dim < 1) throw DomainError("dimension must be >= 1");
  if (!(alpha >= 0.0 && alpha < dim)) throw DomainError("Tauberian constants need 0 <= alpha < d");
  TauberianConstants c;
  const double d = dim;
  if (alpha == 0.0) {
    if (dim != 2) throw DomainError("alpha = 0 constants are defined for d = 2 only");
    if (!(gamma > 0.0)) throw DomainError("alpha = 0 needs gamma > 0");
    c.c_doubleprime = 2.0 * pi * gamma;
    c.c_prime = std::sqrt(gamma) / std::sqrt(2.0 * pi);
    return c;
  }
  using boost::math::tgamma;
  c.c_doubleprime = std::pow(pi, 0.5 * d) * std::pow(2.0, d - alpha) *
                    tgamma(0.5 * (d - alpha)) / tgamma(0.5 * alpha);
  c.c_prime = std::pow(pi, -0.25 * d) *
              std::sqrt(tgamma(0.5 * (d - alpha)) / tgamma(0.5 * alpha)) *
              tgamma(0.25 * (d + alpha)) / tgamma(0.25 * (d - alpha));
  return c;
}

double slowly_varying_part(const Kernel& k, double r) {
  if (!(r > 0.0)) throw DomainError("slowly varying part needs r > 0");
  return std::pow(r, k.alpha()) * k(r);
}

double reconstruct_from_mixture(const ScaleMixture& mix, double r, double quad_tol) {
  if (r < 0.0) throw DomainError("r must be >= 0");
  auto g = [&](double u) {
    const double s = std::exp(u);
    const double e = s * r * r;
    if (e > 745.0 || s > 1e300) return 0.0;
    return s * mix.v(s) * std::exp(-e);
  };
  const double inf = std::numeric_limits<double>::infinity();
  const auto lo = quad::integrate(g, -inf, 0.0, quad_tol);
  const auto hi = quad::integrate(g, 0.0, inf, quad_tol);
  return lo.value + hi.value;
}

double reconstruct_from_w(const ScaleMixture& mix, double r, double quad_tol) {
  if (r < 0.0) throw DomainError("r must be >= 0");
  const double d = mix.dim;
  auto g = [&](double u) {
    const double t = std::exp(u);
    const double e = r * r / (4.0 * t * t);
    if (e > 745.0 || t < 1e-150 || t > 1e150) return 0.0;
    return t * mix.w(t) * std::pow(pi, 0.5 * d) * std::pow(t, d) * std::exp(-e);
  };
  const double inf = std::numeric_limits<double>::infinity();
  const auto lo = quad::integrate(g, -inf, 0.0, quad_tol);
  const auto hi = quad::integrate(g, 0.0, inf, quad_tol);
  return lo.value + hi.value;
}

MovingAverageKernel::MovingAverageKernel(int dim, std::function<double(double)> q,
                                         double support_radius, double normalization,
                                         double total_mass, std::string kernel_id)
    : dim_(dim),
      q_(std::move(q)),
      support_(support_radius),
      normalization_(normalization),
      total_mass_(total_mass),
      id_(std::move(kernel_id)) {
  if (!(support_radius > 0.0) || !std::isfinite(support_radius))
    throw DomainError("moving-average support radius must be finite and positive");
}

double MovingAverageKernel::operator()(double r) const {
  r = std::abs(r);
  if (r >= support_) return 0.0;
  return scale_ * q_(r);
}

double MovingAverageKernel::discarded_mass() const {
  auto g = [&](double r) {
    const double v = q_(r);
    return v * v * std::pow(r, dim_ - 1);
  };
  const double inside = sphere_area(dim_) * quad::integrate_unchecked(g, 0.0, support_, 1e-10).value;
  return 1.0 - scale_ * scale_ * inside / total_mass_;
}

MovingAverageKernel MovingAverageKernel::scaled(double c) const {
  MovingAverageKernel out = *this;
  out.scale_ *= c;
  out.total_mass_ *= c * c;
  return out;
}

double cauchy_spectral_density(double alpha, int dim, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("spectral density needs lambda > 0");
  const double d = dim;
  const double nu = 0.5 * (d - alpha);
  return std::pow(2.0 * pi, 0.5 * d) * std::pow(2.0, 1.0 - 0.5 * alpha) /
         std::tgamma(0.5 * alpha) * std::pow(lambda, -nu) *
         boost::math::cyl_bessel_k(nu, lambda);
}

MovingAverageKernel make_moving_average_from_spectrum(
    int dim, const std::function<double(double)>& sqrt_rho, double lambda_max,
    double support_radius, double total_mass, const std::string& id, double dr) {
  if (dim < 1 || dim > 3) throw DomainError("moving average roots are built for d in {1,2,3}");
  if (!(support_radius > 0.0)) throw DomainError("support radius must be positive");

  // lambda nodes: u^2 substitution near 0, then GL panels short enough to
  // resolve the Bessel oscillation at the largest tabulated radius
  std::vector<double> lam, wt;
  const double width = std::min(0.25, pi / (support_radius + 1.0));
  const double lam1 = width;
  {
    const auto& gl = quad::gauss_legendre(32);
    for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
      const double u = 0.5 * (gl.nodes[k] + 1.0);
      lam.push_back(lam1 * u * u);
      wt.push_back(0.5 * gl.weights[k] * 2.0 * lam1 * u);
    }
  }
  {
    const auto& gl = quad::gauss_legendre(10);
    for (double a = lam1; a < lambda_max; a += width) {
      const double b = std::min(a + width, lambda_max);
      for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
        lam.push_back(0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[k]);
        wt.push_back(0.5 * (b - a) * gl.weights[k]);
      }
    }
  }
  const double d = dim;
  std::vector<double> f(lam.size());
  for (std::size_t k = 0; k < lam.size(); ++k)
    f[k] = wt[k] * sqrt_rho(lam[k]) * std::pow(lam[k], 0.5 * d);

  const double pref = std::pow(2.0 * pi, -0.5 * d);
  // r^{-nu} J_nu(lambda r), nu = d/2 - 1
  auto radial = [dim](double lambda, double r) {
    switch (dim) {
      case 1: return std::sqrt(2.0 / (pi * lambda)) * std::cos(lambda * r);
      case 3:
        if (r == 0.0) return std::sqrt(2.0 * lambda / pi);
        return std::sqrt(2.0 / (pi * lambda)) * std::sin(lambda * r) / r;
      default: return ::j0(lambda * r);
    }
  };

  const int n = static_cast<int>(std::ceil(support_radius / dr)) + 4;
  std::vector<double> table(n);
  for (int i = 0; i < n; ++i) {
    const double r = i * dr;
    double acc = 0.0;
    for (std::size_t k = 0; k < lam.size(); ++k) acc += f[k] * radial(lam[k], r);
    table[i] = pref * acc;
  }
  auto spline = std::make_shared<Spline>(table.begin(), table.end(), 0.0, dr, 0.0);
  auto q = [spline](double r) { return (*spline)(r); };
  return MovingAverageKernel(dim, q, support_radius, 1.0, total_mass, id);
}

MovingAverageKernel make_moving_average(const Kernel& k, double support_radius) {
  switch (k.family()) {
    case KernelFamily::Cauchy: {
      const double alpha = k.alpha();
      const int dim = k.dim();
      auto sr = [alpha, dim](double lambda) {
        return std::sqrt(cauchy_spectral_density(alpha, dim, lambda));
      };
      return make_moving_average_from_spectrum(dim, sr, 80.0, support_radius, 1.0, k.id());
    }
    case KernelFamily::LogCorrelated: {
      auto root = k.root();
      return MovingAverageKernel(k.dim(), root, support_radius, k.normalization(), *k.k0(),
                                 k.id());
    }
    default: break;
  }
  throw DomainError("no moving-average root available for " + k.id());
}

}  // namespace gaussperc
