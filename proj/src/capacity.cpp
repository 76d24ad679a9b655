#include "gaussperc/capacity.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "gaussperc/errors.hpp"
#include "gaussperc/quadrature.hpp"

namespace gaussperc {

namespace {

constexpr double pi = std::numbers::pi;

double dist(const Point& a, const Point& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

bool singular(const Kernel& k) { return !k.k0().has_value(); }

// second antiderivative F(t) = \int_0^{|t|} (|t| - s) K(s) ds
double second_antiderivative(const Kernel& k, double t) {
  t = std::abs(t);
  if (t == 0.0) return 0.0;
  if (k.family() == KernelFamily::Riesz) {
    const double a = k.alpha();
    if (a >= 1.0) throw SingularityError("Riesz energy of a segment diverges for alpha >= 1");
    return std::pow(t, 2.0 - a) / ((1.0 - a) * (2.0 - a));
  }
  // bounded kernels are smooth at cell scale: composite fixed-order rule
  const auto& gl = quad::gauss_legendre(20);
  const int panels = static_cast<int>(std::ceil(t));
  const double w = t / panels;
  double acc = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double a = p * w;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      const double s = a + 0.5 * w * (gl.nodes[i] + 1.0);
      acc += 0.5 * w * gl.weights[i] * (t - s) * k(s);
    }
  }
  return acc;
}

}  // namespace

std::string to_string(DomainKind k) {
  switch (k) {
    case DomainKind::Segment: return "segment";
    case DomainKind::Box: return "box";
    case DomainKind::Ball: return "ball";
    case DomainKind::UnionOfBalls: return "union_of_balls";
    case DomainKind::CondensedSegment: return "condensed_segment";
  }
  return "segment";
}

DiscretizedDomain segment_domain(double R, std::size_t n) {
  if (!(R > 0.0)) throw DomainError("segment length must be positive");
  if (n < 2) throw DomainError("segment needs at least two cells");
  DiscretizedDomain d;
  d.kind = DomainKind::Segment;
  d.cell_dim = 1;
  d.cell_size = R / static_cast<double>(n);
  d.cells.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    d.cells[i].center = {(static_cast<double>(i) + 0.5) * d.cell_size, 0.0, 0.0};
    d.cells[i].half = 0.5 * d.cell_size;
  }
  d.params["R"] = R;
  d.params["n"] = static_cast<double>(n);
  return d;
}

DiscretizedDomain segment_domain_max_cell(double R, double max_cell) {
  if (!(max_cell > 0.0)) throw DomainError("cell size must be positive");
  const auto n = static_cast<std::size_t>(std::ceil(R / max_cell - 1e-9));
  return segment_domain(R, std::max<std::size_t>(n, 2));
}

DiscretizedDomain condensed_segment(double s, double r, double R, double max_cell) {
  if (!(s >= 0.0) || s > r) throw DomainError("condensed segment needs 0 <= s <= r");
  if (!(r > 0.0) || r > R) throw DomainError("condensed segment needs 0 < r <= R");
  const auto count = static_cast<long>(std::floor(R / r + 1e-12)) - 1;
  if (count < 1) throw DomainError("condensed segment has no pieces (floor(R/r) < 2)");
  const std::size_t per = s > 0.0 ? static_cast<std::size_t>(std::ceil(s / max_cell - 1e-9)) : 1;
  const double len = s / static_cast<double>(per);
  DiscretizedDomain d;
  d.kind = DomainKind::CondensedSegment;
  d.cell_dim = 1;
  d.cell_size = len;
  for (long i = 1; i <= count; ++i) {
    for (std::size_t j = 0; j < per; ++j) {
      Cell c;
      c.center = {i * r + (static_cast<double>(j) + 0.5) * len, 0.0, 0.0};
      c.half = 0.5 * len;
      d.cells.push_back(c);
    }
  }
  if (d.cells.size() < 2) throw DomainError("condensed segment needs at least two cells");
  d.params["s"] = s;
  d.params["r"] = r;
  d.params["R"] = R;
  d.params["segments"] = static_cast<double>(count);
  return d;
}

DiscretizedDomain box_domain(double a, double cell) {
  if (!(a > 0.0) || !(cell > 0.0)) throw DomainError("box needs positive side and cell");
  const auto m = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(a / cell - 1e-9)));
  const double h = a / static_cast<double>(m);
  DiscretizedDomain d;
  d.kind = DomainKind::Box;
  d.cell_dim = 2;
  d.cell_size = h;
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < m; ++i) {
      Cell c;
      c.center = {(i + 0.5) * h, (j + 0.5) * h, 0.0};
      c.half = 0.5 * h;
      d.cells.push_back(c);
    }
  d.params["a"] = a;
  return d;
}

namespace {

void add_ball_cells(std::vector<Cell>& cells, const Point& center, double radius, double cell) {
  const long m = static_cast<long>(std::ceil(radius / cell)) + 1;
  for (long j = -m; j < m; ++j)
    for (long i = -m; i < m; ++i) {
      const double x = (i + 0.5) * cell;
      const double y = (j + 0.5) * cell;
      if (x * x + y * y > radius * radius) continue;
      Cell c;
      c.center = {center[0] + x, center[1] + y, 0.0};
      c.half = 0.5 * cell;
      cells.push_back(c);
    }
}

}  // namespace

DiscretizedDomain ball_domain(const Point& center, double radius, double cell) {
  if (!(radius > 0.0) || !(cell > 0.0)) throw DomainError("ball needs positive radius and cell");
  DiscretizedDomain d;
  d.kind = DomainKind::Ball;
  d.cell_dim = 2;
  d.cell_size = cell;
  add_ball_cells(d.cells, center, radius, cell);
  if (d.cells.size() < 2) throw DomainError("ball discretisation has fewer than two cells");
  d.params["radius"] = radius;
  return d;
}

DiscretizedDomain union_of_balls(double s, const std::vector<Point>& centers, double cell) {
  if (!(s > 0.0) || !(cell > 0.0)) throw DomainError("balls need positive radius and cell");
  if (centers.empty()) throw DomainError("union of balls needs at least one centre");
  DiscretizedDomain d;
  d.kind = DomainKind::UnionOfBalls;
  d.cell_dim = 2;
  d.cell_size = cell;
  for (const auto& c : centers) add_ball_cells(d.cells, c, s, cell);
  if (d.cells.size() < 2) throw DomainError("ball discretisation has fewer than two cells");
  d.params["s"] = s;
  d.params["balls"] = static_cast<double>(centers.size());
  return d;
}

DiscreteMeasure uniform_measure(const DiscretizedDomain& d) {
  DiscreteMeasure m;
  m.domain = &d;
  m.weights.assign(d.size(), 1.0 / static_cast<double>(d.size()));
  return m;
}

namespace {

double average_1d(const Kernel& k, const Cell& a, const Cell& b, int order_a, int order_b) {
  const auto& ga = quad::gauss_legendre(order_a);
  const auto& gb = quad::gauss_legendre(order_b);
  const double dy = a.center[1] - b.center[1];
  const double dz = a.center[2] - b.center[2];
  double acc = 0.0;
  for (std::size_t i = 0; i < ga.nodes.size(); ++i) {
    const double xa = a.center[0] + a.half * ga.nodes[i];
    double inner = 0.0;
    for (std::size_t j = 0; j < gb.nodes.size(); ++j) {
      const double dx = xa - (b.center[0] + b.half * gb.nodes[j]);
      inner += gb.weights[j] * k(std::sqrt(dx * dx + dy * dy + dz * dz));
    }
    acc += ga.weights[i] * inner;
  }
  return acc / 4.0;
}

double average_2d(const Kernel& k, const Cell& a, const Cell& b, int order_a, int order_b) {
  const auto& ga = quad::gauss_legendre(order_a);
  const auto& gb = quad::gauss_legendre(order_b);
  std::vector<double> bx(gb.nodes.size()), by(gb.nodes.size());
  for (std::size_t j = 0; j < gb.nodes.size(); ++j) {
    bx[j] = b.center[0] + b.half * gb.nodes[j];
    by[j] = b.center[1] + b.half * gb.nodes[j];
  }
  double acc = 0.0;
  for (std::size_t i1 = 0; i1 < ga.nodes.size(); ++i1) {
    const double xa = a.center[0] + a.half * ga.nodes[i1];
    for (std::size_t i2 = 0; i2 < ga.nodes.size(); ++i2) {
      const double ya = a.center[1] + a.half * ga.nodes[i2];
      double inner = 0.0;
      for (std::size_t j1 = 0; j1 < gb.nodes.size(); ++j1) {
        const double dx = xa - bx[j1];
        double row = 0.0;
        for (std::size_t j2 = 0; j2 < gb.nodes.size(); ++j2) {
          const double dy = ya - by[j2];
          row += gb.weights[j2] * k(std::sqrt(dx * dx + dy * dy));
        }
        inner += gb.weights[j1] * row;
      }
      acc += ga.weights[i1] * ga.weights[i2] * inner;
    }
  }
  return acc / 16.0;
}

}  // namespace

double cell_average(const Kernel& k, const Cell& a, const Cell& b, int cell_dim) {
  const double D = dist(a.center, b.center);
  if (a.half == 0.0 && b.half == 0.0) {
    if (D == 0.0 && singular(k))
      throw SingularityError("singular kernel between coincident point atoms");
    return k(D);
  }
  const double hs = a.half + b.half;
  if (cell_dim == 1) {
    const bool collinear = a.center[1] == b.center[1] && a.center[2] == b.center[2];
    if (collinear && a.half > 0.0 && b.half > 0.0 && D <= 4.0 * hs) {
      const double a1 = a.center[0] - a.half, b1 = a.center[0] + a.half;
      const double a2 = b.center[0] - b.half, b2 = b.center[0] + b.half;
      const double v = second_antiderivative(k, b2 - a1) - second_antiderivative(k, b2 - b1) -
                       second_antiderivative(k, a2 - a1) + second_antiderivative(k, a2 - b1);
      return v / ((b1 - a1) * (b2 - a2));
    }
    if (D <= 4.0 * hs) {
      if (singular(k) && (a.half == 0.0 || b.half == 0.0) && D <= hs)
        throw SingularityError("singular kernel with a point atom inside a cell");
      return average_1d(k, a, b, a.half > 0.0 ? 16 : 1, b.half > 0.0 ? 17 : 1);
    }
    return average_1d(k, a, b, a.half > 0.0 ? 3 : 1, b.half > 0.0 ? 3 : 1);
  }
  // squares in the plane
  if (D > 4.0 * hs) return average_2d(k, a, b, a.half > 0.0 ? 2 : 1, b.half > 0.0 ? 2 : 1);
  if (singular(k)) {
    if (a.half == 0.0 || b.half == 0.0)
      throw SingularityError("singular kernel with a point atom near a cell");
    // offset orders keep nodes of the two cells from coinciding
    return average_2d(k, a, b, 6, 7);
  }
  return average_2d(k, a, b, a.half > 0.0 ? 4 : 1, b.half > 0.0 ? 4 : 1);
}

Eigen::MatrixXd gram_matrix(const DiscretizedDomain& d, const Kernel& k) {
  const auto n = static_cast<Eigen::Index>(d.size());
  Eigen::MatrixXd A(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = cell_average(k, d.cells[i], d.cells[j], d.cell_dim);
      A(i, j) = v;
      A(j, i) = v;
    }
  return A;
}

double energy(const Eigen::VectorXd& w, const Eigen::MatrixXd& gram) { return w.dot(gram * w); }

double energy(const DiscreteMeasure& m, const Kernel& k) {
  if (m.domain == nullptr) throw DomainError("measure has no domain");
  if (m.weights.size() != m.domain->size()) throw DomainError("weights/cells size mismatch");
  const Eigen::MatrixXd A = gram_matrix(*m.domain, k);
  const Eigen::Map<const Eigen::VectorXd> w(m.weights.data(), static_cast<Eigen::Index>(m.weights.size()));
  return std::max(0.0, energy(Eigen::VectorXd(w), A));
}

namespace {

Eigen::Index argmin_lowest(const Eigen::VectorXd& g) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < g.size(); ++i)
    if (g[i] < g[best]) best = i;
  return best;
}

}  // namespace

CapacityResult capacity_from_gram(const Eigen::MatrixXd& A, const CapacityOptions& opts) {
  const Eigen::Index n = A.rows();
  if (n < 2) throw DomainError("capacity needs at least two cells");
  if (!(opts.tol > 0.0)) throw DomainError("tolerance must be positive");
  const std::size_t max_iter = opts.max_iter > 0 ? opts.max_iter : 200 * static_cast<std::size_t>(n);

  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  Eigen::VectorXd g = A * w;
  CapacityResult res;
  std::size_t it = 0;
  for (; it < max_iter; ++it) {
    const double E = w.dot(g);
    if (!(E > 0.0)) throw NumericError("non-positive energy; Gram matrix is indefinite", E);
    const Eigen::Index s = argmin_lowest(g);
    const double gap = 2.0 * (E - g[s]);
    if (gap <= opts.tol * E) {
      res.converged = true;
      break;
    }

    if (opts.corrective_every > 0 && it % opts.corrective_every == opts.corrective_every - 1) {
      // fully corrective step: minimise over the affine hull of the support
      // (plus the Frank-Wolfe vertex), then move as far as feasibility allows
      std::vector<Eigen::Index> sup;
      for (Eigen::Index i = 0; i < n; ++i)
        if (w[i] > 0.0 || i == s) sup.push_back(i);
      const auto m = static_cast<Eigen::Index>(sup.size());
      Eigen::MatrixXd As(m, m);
      for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = 0; b < m; ++b) As(a, b) = A(sup[a], sup[b]);
      Eigen::LDLT<Eigen::MatrixXd> ldlt(As);
      const Eigen::VectorXd x = ldlt.solve(Eigen::VectorXd::Ones(m));
      const double sx = x.sum();
      if (ldlt.info() == Eigen::Success && std::isfinite(sx) && sx > 0.0) {
        Eigen::VectorXd dvec = Eigen::VectorXd::Zero(n);
        for (Eigen::Index a = 0; a < m; ++a) dvec[sup[a]] = x[a] / sx - w[sup[a]];
        double t_max = 1.0;
        for (Eigen::Index a = 0; a < m; ++a) {
          const Eigen::Index i = sup[a];
          if (dvec[i] < 0.0) t_max = std::min(t_max, w[i] / -dvec[i]);
        }
        const Eigen::VectorXd Ad = A * dvec;
        const double curv = dvec.dot(Ad);
        const double slope = dvec.dot(g);
        if (curv > 0.0 && slope < 0.0) {
          const double t = std::min(t_max, -slope / curv);
          w += t * dvec;
          for (Eigen::Index i = 0; i < n; ++i)
            if (w[i] < 1e-300) w[i] = 0.0;
          if (t == t_max)
            for (Eigen::Index a = 0; a < m; ++a) {
              const Eigen::Index i = sup[a];
              if (dvec[i] < 0.0 && w[i] <= -t_max * dvec[i] * 1e-12) w[i] = 0.0;
            }
          w /= w.sum();
          g = A * w;
          continue;
        }
      }
    }

    // pairwise step: move mass from the worst support cell to the best cell
    Eigen::Index v = -1;
    for (Eigen::Index i = 0; i < n; ++i)
      if (w[i] > 0.0 && (v < 0 || g[i] > g[v])) v = i;
    const double num = g[v] - g[s];
    const double den = A(s, s) + A(v, v) - 2.0 * A(s, v);
    double gamma = den > 0.0 ? num / den : w[v];
    gamma = std::min(gamma, w[v]);
    if (!(gamma > 0.0)) break;
    w[s] += gamma;
    if (gamma == w[v])
      w[v] = 0.0;
    else
      w[v] -= gamma;
    g += gamma * (A.col(s) - A.col(v));
    if (it % 1000 == 999) g = A * w;
  }

  w /= w.sum();
  g = A * w;
  const double E = w.dot(g);
  res.iterations = it;
  res.energy = E;
  res.capacity = 1.0 / E;
  res.n = static_cast<std::size_t>(n);
  res.weights.assign(w.data(), w.data() + n);
  res.potential.resize(static_cast<std::size_t>(n));
  double gmin = std::numeric_limits<double>::infinity();
  double gmin_sup = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    res.potential[i] = res.capacity * g[i];
    gmin = std::min(gmin, g[i]);
    if (w[i] > 1e-6) gmin_sup = std::min(gmin_sup, g[i]);
  }
  res.potential_min = res.capacity * gmin;
  res.potential_min_on_support = res.capacity * gmin_sup;
  res.duality_gap = std::max(0.0, 2.0 * (E - gmin) / E);
  res.capacity_upper = E / (gmin * gmin);
  if (!res.converged) res.converged = res.duality_gap <= opts.tol;
  return res;
}

CapacityResult capacity(const DiscretizedDomain& d, const Kernel& k, const CapacityOptions& opts) {
  if (d.size() < 2) throw DomainError("capacity needs at least two cells");
  CapacityResult res = capacity_from_gram(gram_matrix(d, k), opts);
  res.cell_size = d.cell_size;
  return res;
}

namespace {

double point_cell_average(const Kernel& k, const Point& p, const Cell& c, int cell_dim) {
  if (c.half == 0.0) return k(dist(p, c.center));
  Cell pc;
  pc.center = p;
  pc.half = 0.0;
  const double D = dist(p, c.center);
  const int order = D <= 4.0 * c.half ? 24 : 4;
  if (cell_dim == 1) return average_1d(k, pc, c, 1, order);
  return average_2d(k, pc, c, 1, order);
}

bool inside(const Point& p, const Cell& c, int cell_dim) {
  if (c.half == 0.0) return p == c.center;
  if (std::abs(p[0] - c.center[0]) > c.half) return false;
  if (cell_dim == 1) return std::abs(p[1] - c.center[1]) < 1e-12 && std::abs(p[2] - c.center[2]) < 1e-12;
  return std::abs(p[1] - c.center[1]) <= c.half && std::abs(p[2] - c.center[2]) < 1e-12;
}

}  // namespace

std::vector<double> dual_potential(const CapacityResult& res, const DiscretizedDomain& d,
                                   const Kernel& k, const std::vector<Point>& points) {
  if (res.weights.size() != d.size()) throw DomainError("result does not match domain");
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    std::size_t hit = d.size();
    for (std::size_t i = 0; i < d.size(); ++i)
      if (inside(p, d.cells[i], d.cell_dim)) {
        hit = i;
        break;
      }
    if (hit < d.size() && !res.potential.empty()) {
      out.push_back(res.potential[hit]);
      continue;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i)
      if (res.weights[i] > 0.0) acc += res.weights[i] * point_cell_average(k, p, d.cells[i], d.cell_dim);
    out.push_back(res.capacity * acc);
  }
  return out;
}

double c_alpha(double alpha) {
  if (!(alpha >= 0.0)) throw DomainError("c_alpha needs alpha >= 0");
  if (alpha >= 1.0) throw DomainError("c_alpha is defined for alpha < 1");
  if (alpha == 0.0) return 1.0;
  const double x = 0.5 * (1.0 + alpha);
  return boost::math::beta(x, x) * std::cos(0.5 * pi * alpha) / pi;
}

double capacity_asymptote(const Kernel& k, double R) {
  if (!(R > 0.0)) throw DomainError("R must be positive");
  const double a = k.alpha();
  if (a < 1.0) return c_alpha(a) / k(R);
  if (a == 1.0) {
    if (singular(k)) throw DomainError("integral of a singular kernel near 0 diverges");
    const double I = quad::integrate([&](double x) { return k(x); }, 0.0, R, 1e-12).value;
    return R / (2.0 * I);
  }
  if (singular(k)) throw DomainError("integral of a singular kernel near 0 diverges");
  // power tail: x = e^u on [1, e^300], then the pure power remainder
  const double umax = 300.0;
  const double I =
      quad::integrate([&](double x) { return k(x); }, 0.0, 1.0, 1e-12).value +
      quad::integrate([&](double u) { return k(std::exp(u)) * std::exp(u); }, 0.0, umax, 1e-12)
          .value +
      k(std::exp(umax)) * std::exp(umax) / (a - 1.0);
  if (!(I > 0.0)) throw DomainError("alpha > 1 needs a positive kernel integral");
  return R / (2.0 * I);
}

double riesz_equilibrium_density(double alpha, double x) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("density needs 0 < alpha < 1");
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("density needs x in [0, 1]");
  if (x == 0.0 || x == 1.0) return std::numeric_limits<double>::infinity();
  const double b = 0.5 * (1.0 + alpha);
  return std::pow(x * (1.0 - x), 0.5 * (alpha - 1.0)) / boost::math::beta(b, b);
}

double riesz_equilibrium_cdf(double alpha, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double b = 0.5 * (1.0 + alpha);
  return boost::math::ibeta(b, b, x);
}

ProjectionResult projection_compare(const Kernel& k, double s, const std::vector<Point>& centers,
                                    double r, double cell, const CapacityOptions& opts) {
  if (centers.empty()) throw DomainError("projection needs at least one ball");
  if (!(s > 0.0) || !(s < 0.5 * r)) throw DomainError("projection needs 0 < s < r/2");
  for (std::size_t i = 0; i < centers.size(); ++i)
    for (std::size_t j = i + 1; j < centers.size(); ++j)
      if (dist(centers[i], centers[j]) < (j - i) * r * (1.0 - 1e-12)) {
        std::ostringstream msg;
        msg << "centres " << i << " and " << j << " closer than " << (j - i) * r;
        throw DomainError(msg.str());
      }
  std::vector<Point> line;
  for (std::size_t i = 0; i < centers.size(); ++i)
    line.push_back({static_cast<double>(i + 1) * r, 0.0, 0.0});
  ProjectionResult out;
  out.cap_balls = capacity(union_of_balls(s, centers, cell), k, opts).capacity;
  out.cap_condensed = capacity(union_of_balls(s, line, cell), k, opts).capacity;
  out.ratio = out.cap_balls / out.cap_condensed;
  // n segments i r + [0, s], i = 1..n, i.e. S_{s, r, (n+1) r}
  const double R = static_cast<double>(centers.size() + 1) * r;
  out.cap_segments = capacity(condensed_segment(s, r, R, cell), k, opts).capacity;
  out.ratio_segments = out.cap_balls / out.cap_segments;
  return out;
}

double ks_distance_to_beta(const CapacityResult& res, const DiscretizedDomain& d, double alpha) {
  if (d.cell_dim != 1) throw DomainError("KS distance needs a segment domain");
  std::vector<std::size_t> order(d.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return d.cells[a].center[0] < d.cells[b].center[0]; });
  const double lo = d.cells[order.front()].center[0] - d.cells[order.front()].half;
  const double hi = d.cells[order.back()].center[0] + d.cells[order.back()].half;
  double F = 0.0;
  double ks = 0.0;
  for (std::size_t idx : order) {
    const auto& c = d.cells[idx];
    const double left = (c.center[0] - c.half - lo) / (hi - lo);
    ks = std::max(ks, std::abs(F - riesz_equilibrium_cdf(alpha, left)));
    F += res.weights[idx];
    const double right = (c.center[0] + c.half - lo) / (hi - lo);
    ks = std::max(ks, std::abs(F - riesz_equilibrium_cdf(alpha, right)));
  }
  return ks;
}

}  // namespace gaussperc
