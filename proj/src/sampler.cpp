#include "gaussperc/sampler.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

#include "gaussperc/errors.hpp"
#include "gaussperc/rng.hpp"

namespace gaussperc {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// In-place complex transform over the torus; axis 0 is the fastest index.
class ComplexFft {
 public:
  ComplexFft(const std::array<std::size_t, 3>& torus, int dim) {
    int dims[3];
    for (int a = 0; a < dim; ++a) dims[a] = static_cast<int>(torus[dim - 1 - a]);
    n_ = torus[0] * torus[1] * torus[2];
    auto* buf = fftw_alloc_complex(n_);
    std::lock_guard lock(planner_mutex());
    // ESTIMATE keeps the chosen algorithm (and so every bit of output)
    // independent of timing measurements
    fwd_ = fftw_plan_dft(dim, dims, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    bwd_ = fftw_plan_dft(dim, dims, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    if (fwd_ == nullptr || bwd_ == nullptr) throw ResourceError("FFTW planning failed");
  }
  ~ComplexFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
  }
  ComplexFft(const ComplexFft&) = delete;
  ComplexFft& operator=(const ComplexFft&) = delete;

  void forward(std::vector<std::complex<double>>& x) const {
    auto* p = reinterpret_cast<fftw_complex*>(x.data());
    fftw_execute_dft(fwd_, p, p);
  }
  void backward(std::vector<std::complex<double>>& x) const {
    auto* p = reinterpret_cast<fftw_complex*>(x.data());
    fftw_execute_dft(bwd_, p, p);
  }
  std::size_t size() const { return n_; }

 private:
  fftw_plan fwd_ = nullptr;
  fftw_plan bwd_ = nullptr;
  std::size_t n_ = 0;
};

// torus offset of index k along an axis of length N
inline long wrap(std::size_t k, std::size_t N) {
  return k <= N / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(N);
}

double torus_radius(std::size_t idx, const std::array<std::size_t, 3>& N, double h) {
  const std::size_t k0 = idx % N[0];
  const std::size_t k1 = (idx / N[0]) % N[1];
  const std::size_t k2 = idx / (N[0] * N[1]);
  const double a = static_cast<double>(wrap(k0, N[0]));
  const double b = static_cast<double>(wrap(k1, N[1]));
  const double c = static_cast<double>(wrap(k2, N[2]));
  return h * std::sqrt(a * a + b * b + c * c);
}

std::size_t torus_index(const std::array<std::size_t, 3>& N, std::size_t i0, std::size_t i1,
                        std::size_t i2) {
  return i0 + N[0] * (i1 + N[1] * i2);
}

void check_budget(const std::array<std::size_t, 3>& N, std::size_t budget) {
  const std::size_t total = N[0] * N[1] * N[2];
  if (total > budget) {
    std::ostringstream msg;
    msg << "torus of " << total << " points exceeds the budget of " << budget;
    throw ResourceError(msg.str());
  }
}

}  // namespace

std::array<std::size_t, 3> Grid::multi_index(std::size_t idx) const {
  return {idx % n[0], (idx / n[0]) % n[1], idx / (n[0] * n[1])};
}

Point Grid::coord(std::size_t idx) const {
  const auto m = multi_index(idx);
  Point p = origin;
  for (int a = 0; a < dim; ++a) p[a] += h * static_cast<double>(m[a]);
  return p;
}

Grid make_grid(int dim, double extent, double h, const Point& origin) {
  if (dim < 1 || dim > 3) throw DomainError("grid dimension must be 1, 2 or 3");
  if (!(h > 0.0)) throw DomainError("grid spacing must be positive");
  if (!(extent >= 0.0)) throw DomainError("grid extent must be non-negative");
  const double steps = extent / h;
  const double r = std::round(steps);
  if (std::abs(steps - r) > 1e-9 * std::max(1.0, steps))
    throw DomainError("grid extent must be an integer multiple of the spacing");
  Grid g;
  g.dim = dim;
  g.h = h;
  g.origin = origin;
  for (int a = 0; a < dim; ++a) g.n[a] = static_cast<std::size_t>(r) + 1;
  return g;
}

Grid centered_grid(int dim, double half_width, double h) {
  Point o{0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) o[a] = -half_width;
  return make_grid(dim, 2.0 * half_width, h, o);
}

std::size_t nice_fft_size(std::size_t n) {
  if (n <= 1) return 1;
  for (std::size_t m = n;; ++m) {
    std::size_t r = m;
    for (std::size_t p : {2, 3, 5})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

struct FieldSampler::Fft {
  ComplexFft plan;
  Fft(const std::array<std::size_t, 3>& t, int dim) : plan(t, dim) {}
};

FieldSampler::FieldSampler(const Kernel& k, const Grid& g, const SamplerOptions& opts)
    : kernel_(k), grid_(g), opts_(opts) {
  if (!k.samplable()) throw DomainError("capacity-only kernel " + k.id() + " cannot be sampled");
  if (k.dim() != g.dim) throw DomainError("kernel and grid dimensions differ");
  if (!(opts.padding >= 1.0)) throw DomainError("padding factor must be >= 1");

  const std::size_t P = g.size();
  dense_ = P <= opts.dense_max_points && !opts.force_spectral;
  if (dense_) {
    Eigen::MatrixXd A(P, P);
    for (std::size_t i = 0; i < P; ++i) {
      const Point xi = g.coord(i);
      for (std::size_t j = i; j < P; ++j) {
        const Point xj = g.coord(j);
        const double dx = xi[0] - xj[0], dy = xi[1] - xj[1], dz = xi[2] - xj[2];
        const double v = k(std::sqrt(dx * dx + dy * dy + dz * dz));
        A(i, j) = v;
        A(j, i) = v;
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    if (es.info() != Eigen::Success) throw NumericError("eigendecomposition of the Gram matrix failed");
    Eigen::VectorXd lam = es.eigenvalues();
    double neg = 0.0, pos = 0.0;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
      if (lam[i] < 0.0) {
        neg += -lam[i];
        lam[i] = 0.0;
      } else {
        pos += lam[i];
      }
    }
    clipped_ = neg / pos;
    root_ = es.eigenvectors() * lam.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  } else {
    for (int a = 0; a < g.dim; ++a)
      torus_[a] = nice_fft_size(static_cast<std::size_t>(std::ceil(opts.padding * g.n[a])));
    check_budget(torus_, opts.max_torus_points);
    fft_ = std::make_unique<Fft>(torus_, g.dim);
    const std::size_t N = fft_->plan.size();
    std::vector<std::complex<double>> c(N);
    for (std::size_t i = 0; i < N; ++i) c[i] = k(torus_radius(i, torus_, g.h));
    fft_->plan.forward(c);
    sqrt_lambda_.resize(N);
    lambda_.resize(N);
    double neg = 0.0, pos = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double l = c[i].real();
      if (l < 0.0)
        neg += -l;
      else
        pos += l;
      lambda_[i] = std::max(l, 0.0) / static_cast<double>(N);
      sqrt_lambda_[i] = std::sqrt(lambda_[i]);
    }
    clipped_ = neg / pos;
  }
  if (clipped_ > opts.clip_warn) {
    std::ostringstream msg;
    msg << "relative clipped spectral mass " << clipped_ << " exceeds " << opts.clip_warn;
    warnings_.push_back(msg.str());
  }
}

FieldSampler::~FieldSampler() = default;

Provenance FieldSampler::make_provenance(const std::string& part) const {
  Provenance p;
  p.method = dense_ ? "dense_sqrt" : "spectral";
  p.kernel_id = kernel_.id();
  p.part = part;
  p.clipped_mass = clipped_;
  p.torus = torus_;
  p.warnings = warnings_;
  return p;
}

void FieldSampler::spectral_pair(std::uint64_t seed, std::uint64_t pair, std::vector<double>& re,
                                 std::vector<double>& im) const {
  const std::size_t N = fft_->plan.size();
  std::vector<std::complex<double>> buf(N);
  {
    auto eng = make_stream(seed, pair);
    std::vector<double> z(2 * N);
    fill_normal(eng, z.data(), z.size());
    for (std::size_t i = 0; i < N; ++i)
      buf[i] = sqrt_lambda_[i] * std::complex<double>(z[2 * i], z[2 * i + 1]);
  }
  fft_->plan.forward(buf);
  const std::size_t P = grid_.size();
  re.resize(P);
  im.resize(P);
  for (std::size_t idx = 0; idx < P; ++idx) {
    const auto m = grid_.multi_index(idx);
    const auto& v = buf[torus_index(torus_, m[0], m[1], m[2])];
    re[idx] = v.real();
    im[idx] = v.imag();
  }
}

GridField FieldSampler::sample(std::uint64_t seed, std::uint64_t trial) const {
  GridField f;
  f.grid = grid_;
  f.seed = seed;
  f.trial = trial;
  if (dense_) {
    const auto z = normals(seed, trial, grid_.size());
    const Eigen::Map<const Eigen::VectorXd> zv(z.data(), static_cast<Eigen::Index>(z.size()));
    const Eigen::VectorXd v = root_ * zv;
    f.values.assign(v.data(), v.data() + v.size());
    f.provenance = make_provenance("");
    return f;
  }
  std::vector<double> re, im;
  spectral_pair(seed, trial / 2, re, im);
  const bool odd = trial % 2 == 1;
  f.values = odd ? std::move(im) : std::move(re);
  f.provenance = make_provenance(odd ? "imag" : "real");
  return f;
}

std::pair<GridField, GridField> FieldSampler::sample_pair(std::uint64_t seed,
                                                          std::uint64_t pair) const {
  if (dense_) return {sample(seed, 2 * pair), sample(seed, 2 * pair + 1)};
  std::pair<GridField, GridField> out;
  spectral_pair(seed, pair, out.first.values, out.second.values);
  for (int k = 0; k < 2; ++k) {
    auto& f = k == 0 ? out.first : out.second;
    f.grid = grid_;
    f.seed = seed;
    f.trial = 2 * pair + static_cast<std::uint64_t>(k);
    f.provenance = make_provenance(k == 0 ? "real" : "imag");
  }
  return out;
}

std::vector<double> FieldSampler::apply_covariance(const std::vector<double>& m) const {
  const std::size_t P = grid_.size();
  if (m.size() != P) throw DomainError("covariance operand does not match the grid");
  if (dense_) {
    const Eigen::Map<const Eigen::VectorXd> mv(m.data(), static_cast<Eigen::Index>(P));
    const Eigen::VectorXd t = root_ * mv;
    const Eigen::VectorXd v = root_ * t;
    return std::vector<double>(v.data(), v.data() + v.size());
  }
  const std::size_t N = fft_->plan.size();
  std::vector<std::complex<double>> buf(N);
  for (std::size_t idx = 0; idx < P; ++idx) {
    const auto mi = grid_.multi_index(idx);
    buf[torus_index(torus_, mi[0], mi[1], mi[2])] = m[idx];
  }
  fft_->plan.forward(buf);
  for (std::size_t i = 0; i < N; ++i) buf[i] *= lambda_[i];
  fft_->plan.backward(buf);
  std::vector<double> out(P);
  for (std::size_t idx = 0; idx < P; ++idx) {
    const auto mi = grid_.multi_index(idx);
    out[idx] = buf[torus_index(torus_, mi[0], mi[1], mi[2])].real();
  }
  return out;
}

GridField sample_field(const Kernel& k, const Grid& g, std::uint64_t seed,
                       const SamplerOptions& opts) {
  return FieldSampler(k, g, opts).sample(seed, 0);
}

double cutoff_phi(double x) {
  auto psi = [](double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; };
  x = std::abs(x);
  if (x <= 0.25) return 1.0;
  if (x >= 0.5) return 0.0;
  const double a = psi(0.5 - x);
  const double b = psi(x - 0.25);
  return a / (a + b);
}

struct MovingAverageSampler::Fft {
  ComplexFft plan;
  Fft(const std::array<std::size_t, 3>& t, int dim) : plan(t, dim) {}
};

MovingAverageSampler::MovingAverageSampler(const MovingAverageKernel& ma, const Grid& g,
                                           const SamplerOptions& opts)
    : ma_(ma), grid_(g), opts_(opts) {
  if (ma.dim() != g.dim) throw DomainError("moving-average and grid dimensions differ");
  const auto reach = static_cast<std::size_t>(std::ceil(ma.support_radius() / g.h));
  for (int a = 0; a < g.dim; ++a) torus_[a] = nice_fft_size(g.n[a] + 2 * reach + 1);
  check_budget(torus_, opts.max_torus_points);
  fft_ = std::make_unique<Fft>(torus_, g.dim);
  discarded_ = ma.discarded_mass();
  if (discarded_ > 0.01) {
    std::ostringstream msg;
    msg << "support truncation discards " << discarded_ << " of |q|^2";
    warnings_.push_back(msg.str());
  }
  stencil_hat_ = stencil_transform(0.0);
}

MovingAverageSampler::~MovingAverageSampler() = default;

std::vector<std::complex<double>> MovingAverageSampler::stencil_transform(double L) const {
  const std::size_t N = fft_->plan.size();
  const double scale = std::pow(grid_.h, 0.5 * grid_.dim);
  std::vector<std::complex<double>> s(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double r = torus_radius(i, torus_, grid_.h);
    double v = ma_(r) * scale;
    if (L > 0.0) v *= cutoff_phi(r / L);
    s[i] = v;
  }
  fft_->plan.forward(s);
  return s;
}

std::vector<std::complex<double>> MovingAverageSampler::noise_transform(std::uint64_t seed,
                                                                        std::uint64_t pair) const {
  const std::size_t N = fft_->plan.size();
  std::vector<std::complex<double>> w(N);
  auto eng = make_stream(seed, pair);
  std::vector<double> z(2 * N);
  fill_normal(eng, z.data(), z.size());
  for (std::size_t i = 0; i < N; ++i) w[i] = {z[2 * i], z[2 * i + 1]};
  fft_->plan.forward(w);
  return w;
}

namespace {

// multiples of 2^-40; |x| < 2^12 keeps every sum and difference exact
double quantize(double x) {
  if (!(std::abs(x) < 4096.0)) throw NumericError("moving-average value out of range", x);
  return std::ldexp(std::nearbyint(std::ldexp(x, 40)), -40);
}

}  // namespace

std::vector<double> MovingAverageSampler::convolve(
    const std::vector<std::complex<double>>& stencil_hat,
    const std::vector<std::complex<double>>& noise_hat, int part) const {
  const std::size_t N = fft_->plan.size();
  std::vector<std::complex<double>> buf(N);
  for (std::size_t i = 0; i < N; ++i) buf[i] = stencil_hat[i] * noise_hat[i];
  fft_->plan.backward(buf);
  const double inv = 1.0 / static_cast<double>(N);
  const std::size_t P = grid_.size();
  std::vector<double> out(P);
  for (std::size_t idx = 0; idx < P; ++idx) {
    const auto m = grid_.multi_index(idx);
    const auto& v = buf[torus_index(torus_, m[0], m[1], m[2])];
    out[idx] = quantize((part == 0 ? v.real() : v.imag()) * inv);
  }
  return out;
}

Provenance MovingAverageSampler::make_provenance(const std::string& part, double L) const {
  Provenance p;
  p.method = "moving_average";
  p.kernel_id = ma_.kernel_id();
  p.L = L;
  p.part = part;
  p.torus = torus_;
  p.warnings = warnings_;
  return p;
}

GridField MovingAverageSampler::sample(std::uint64_t seed, std::uint64_t trial) const {
  const int part = static_cast<int>(trial % 2);
  const auto w = noise_transform(seed, trial / 2);
  GridField f;
  f.grid = grid_;
  f.seed = seed;
  f.trial = trial;
  f.values = convolve(stencil_hat_, w, part);
  f.provenance = make_provenance(part == 0 ? "real" : "imag", 0.0);
  return f;
}

MovingAverageSampler::Split MovingAverageSampler::split(double L, std::uint64_t seed,
                                                        std::uint64_t trial) const {
  if (!(L >= 1.0)) throw DomainError("local-global split needs L >= 1");
  for (int a = 0; a < grid_.dim; ++a)
    if (grid_.extent(a) < 2.0 * L) throw DomainError("grid extent must be at least 2L");
  const int part = static_cast<int>(trial % 2);
  const auto w = noise_transform(seed, trial / 2);
  Split s;
  s.f.values = convolve(stencil_hat_, w, part);
  s.f_L.values = convolve(stencil_transform(L), w, part);
  const std::size_t P = grid_.size();
  s.g_L.values.resize(P);
  // f and f_L sit on the same fixed-point lattice, so f - f_L is exact
  // and adding it back reproduces f bit for bit
  for (std::size_t i = 0; i < P; ++i) s.g_L.values[i] = s.f.values[i] - s.f_L.values[i];
  const char* pname = part == 0 ? "real" : "imag";
  for (GridField* f : {&s.f, &s.f_L, &s.g_L}) {
    f->grid = grid_;
    f->seed = seed;
    f->trial = trial;
  }
  s.f.provenance = make_provenance(pname, 0.0);
  s.f_L.provenance = make_provenance(std::string(pname) + ",local", L);
  s.g_L.provenance = make_provenance(std::string(pname) + ",global", L);
  return s;
}

GridField sample_moving_average(const MovingAverageKernel& ma, const Grid& g, std::uint64_t seed,
                                const SamplerOptions& opts) {
  return MovingAverageSampler(ma, g, opts).sample(seed, 0);
}

std::pair<GridField, GridField> local_global_split(const MovingAverageKernel& ma, double L,
                                                   const Grid& g, std::uint64_t seed,
                                                   const SamplerOptions& opts) {
  auto s = MovingAverageSampler(ma, g, opts).split(L, seed, 0);
  return {std::move(s.f_L), std::move(s.g_L)};
}

ShiftSpec make_shift(const CapacityResult& cap, const std::vector<std::size_t>& points,
                     double amplitude, int direction, const std::string& description) {
  if (!cap.converged) throw DomainError("capacity result did not converge; tilt rejected");
  if (points.size() != cap.weights.size())
    throw DomainError("shift points do not match the equilibrium measure");
  if (!(amplitude >= 0.0)) throw DomainError("tilt amplitude must be >= 0");
  if (direction != 1 && direction != -1) throw DomainError("tilt direction must be +1 or -1");
  ShiftSpec s;
  s.points = points;
  s.weights = cap.weights;
  s.capacity = cap.capacity;
  s.amplitude = amplitude;
  s.direction = direction;
  s.description = description;
  return s;
}

Tilt::Tilt(const FieldSampler& sampler, const ShiftSpec& spec) : spec_(spec) {
  const std::size_t P = sampler.grid().size();
  if (spec.points.size() != spec.weights.size()) throw DomainError("shift points/weights mismatch");
  m_.assign(P, 0.0);
  h_.assign(P, 0.0);
  if (spec.amplitude == 0.0) return;
  const double scale = spec.direction * spec.amplitude * spec.capacity;
  for (std::size_t i = 0; i < spec.points.size(); ++i) {
    if (spec.points[i] >= P) throw DomainError("shift point outside the grid");
    m_[spec.points[i]] += scale * spec.weights[i];
  }
  h_ = sampler.apply_covariance(m_);
  std::vector<double> prod(P);
  for (std::size_t i = 0; i < P; ++i) prod[i] = m_[i] * h_[i];
  norm2_ = stats::pairwise_sum(prod);
}

double Tilt::log_weight(const std::vector<double>& shifted) const {
  if (shifted.size() != m_.size()) throw DomainError("field does not match the tilt grid");
  if (spec_.amplitude == 0.0) return 0.0;
  std::vector<double> prod;
  prod.reserve(spec_.points.size());
  for (std::size_t i = 0; i < shifted.size(); ++i)
    if (m_[i] != 0.0) prod.push_back(m_[i] * shifted[i]);
  return -stats::pairwise_sum(prod) + 0.5 * norm2_;
}

TiltedSample Tilt::apply(GridField f) const {
  if (f.values.size() != h_.size()) throw DomainError("field does not match the tilt grid");
  TiltedSample out;
  out.shift_spec = spec_.description;
  if (spec_.amplitude != 0.0)
    for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] += h_[i];
  out.log_weight = log_weight(f.values);
  out.field = std::move(f);
  return out;
}

TiltedSample cameron_martin_tilt(const FieldSampler& sampler, const ShiftSpec& spec,
                                 std::uint64_t seed, std::uint64_t trial) {
  return Tilt(sampler, spec).apply(sampler.sample(seed, trial));
}

CovarianceAccumulator::CovarianceAccumulator(const Grid& g, std::vector<Lag> lags)
    : grid_(g), lags_(std::move(lags)), per_field_(lags_.size()) {
  for (const auto& l : lags_)
    for (int a = 0; a < 3; ++a) {
      const auto need = static_cast<std::size_t>(std::abs(l[a]));
      if (need >= g.n[a]) throw DomainError("lag exceeds the grid window");
    }
}

void CovarianceAccumulator::add(const GridField& f) {
  if (!(f.grid == grid_)) throw DomainError("mismatched grids in covariance estimate");
  const auto& n = grid_.n;
  for (std::size_t li = 0; li < lags_.size(); ++li) {
    const Lag& l = lags_[li];
    std::array<std::size_t, 3> lo{}, hi{};
    for (int a = 0; a < 3; ++a) {
      lo[a] = l[a] < 0 ? static_cast<std::size_t>(-l[a]) : 0;
      hi[a] = l[a] > 0 ? n[a] - static_cast<std::size_t>(l[a]) : n[a];
    }
    double acc = 0.0;
    std::size_t cnt = 0;
    for (std::size_t k = lo[2]; k < hi[2]; ++k)
      for (std::size_t j = lo[1]; j < hi[1]; ++j)
        for (std::size_t i = lo[0]; i < hi[0]; ++i) {
          const std::size_t a = grid_.index(i, j, k);
          const std::size_t b = grid_.index(i + l[0], j + l[1], k + l[2]);
          acc += f.values[a] * f.values[b];
          ++cnt;
        }
    per_field_[li].push_back(acc / static_cast<double>(cnt));
  }
}

std::vector<stats::MeanSe> CovarianceAccumulator::result() const {
  std::vector<stats::MeanSe> out;
  for (const auto& v : per_field_) out.push_back(stats::mean_se(v));
  return out;
}

std::vector<stats::MeanSe> empirical_covariance(const std::vector<GridField>& fields,
                                                const std::vector<Lag>& lags) {
  if (fields.size() < 100) throw DomainError("empirical covariance needs at least 100 fields");
  CovarianceAccumulator acc(fields.front().grid, lags);
  for (const auto& f : fields) acc.add(f);
  return acc.result();
}

}  // namespace gaussperc
