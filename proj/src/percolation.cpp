#include "gaussperc/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>
#include <thread>

#include "gaussperc/errors.hpp"

namespace gaussperc {

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::Arm: return "arm";
    case EventKind::Ann: return "ann";
    case EventKind::AnnInf: return "ann_inf";
    case EventKind::Cross: return "cross";
    case EventKind::Tube: return "tube";
  }
  return "?";
}

EventKind event_from_string(const std::string& s) {
  if (s == "arm") return EventKind::Arm;
  if (s == "ann") return EventKind::Ann;
  if (s == "ann_inf" || s == "anninf") return EventKind::AnnInf;
  if (s == "cross") return EventKind::Cross;
  if (s == "tube") return EventKind::Tube;
  throw ConfigError("unknown event kind '" + s + "'");
}

namespace {

void check_spec(const EventSpec& e) {
  if (!(e.R > 0.0)) throw DomainError("event scale R must be positive");
  if (e.kind == EventKind::Arm && !(e.r_in >= 0.0 && e.r_in < e.R))
    throw DomainError("arm event needs 0 <= r_in < R");
  if (e.kind == EventKind::Tube && !(e.rho > 0.0 && e.rho <= 1.0))
    throw DomainError("tube exponent rho must lie in (0, 1]");
}

double tube_width(const EventSpec& e) { return std::pow(e.R, e.rho); }

template <class F>
void for_each_neighbour(const Grid& g, std::size_t idx, F&& fn) {
  const auto m = g.multi_index(idx);
  std::size_t stride = 1;
  for (int a = 0; a < g.dim; ++a) {
    if (m[a] > 0) fn(idx - stride);
    if (m[a] + 1 < g.n[a]) fn(idx + stride);
    stride *= g.n[a];
  }
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  // smaller index becomes the root
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b)
      parent[b] = a;
    else
      parent[a] = b;
  }
};

double dist2(const Point& a, const Point& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

double cross2(const Point& o, const Point& a, const Point& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

double pairwise_diameter(const std::vector<Point>& p) {
  double best = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j) best = std::max(best, dist2(p[i], p[j]));
  return std::sqrt(best);
}

// convex hull (monotone chain) then farthest pair among hull vertices
double planar_diameter(std::vector<Point> p) {
  std::sort(p.begin(), p.end(), [](const Point& a, const Point& b) {
    return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]);
  });
  std::vector<Point> hull(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && cross2(hull[k - 2], hull[k - 1], p[i]) <= 0.0) --k;
    hull[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross2(hull[k - 2], hull[k - 1], p[i]) <= 0.0) --k;
    hull[k++] = p[i];
  }
  hull.resize(k > 1 ? k - 1 : k);
  // rotating calipers
  const std::size_t m = hull.size();
  if (m < 3) return pairwise_diameter(hull);
  double best = 0.0;
  std::size_t j = 1;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t i1 = (i + 1) % m;
    while (std::abs(cross2(hull[i], hull[i1], hull[(j + 1) % m])) >
           std::abs(cross2(hull[i], hull[i1], hull[j])))
      j = (j + 1) % m;
    best = std::max({best, dist2(hull[i], hull[j]), dist2(hull[i1], hull[j])});
  }
  return std::sqrt(best);
}

}  // namespace

Grid event_window(const EventSpec& e, int dim, double h) {
  check_spec(e);
  const auto snap = [h](double x) { return std::ceil(x / h - 1e-9) * h; };
  switch (e.kind) {
    case EventKind::Arm: return centered_grid(dim, snap(e.R), h);
    case EventKind::Ann:
    case EventKind::AnnInf: return centered_grid(dim, snap(2.0 * e.R), h);
    case EventKind::Cross: return make_grid(dim, snap(e.R), h);
    case EventKind::Tube: {
      Grid g = make_grid(dim, snap(e.R), h);
      const auto n = static_cast<std::size_t>(std::llround(snap(tube_width(e)) / h)) + 1;
      for (int a = 1; a < dim; ++a) g.n[a] = n;
      return g;
    }
  }
  throw DomainError("unknown event kind");
}

EventGeometry event_geometry(const Grid& g, const EventSpec& e) {
  check_spec(e);
  const double h = g.h;
  const double tol = 1e-9 * h;
  const std::size_t P = g.size();
  EventGeometry geo;
  geo.domain.assign(P, 0);

  auto radius = [&](const Point& x) {
    return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
  };
  auto supnorm = [&](const Point& x) {
    return std::max({std::abs(x[0]), std::abs(x[1]), std::abs(x[2])});
  };

  // the window must contain the event's bounding box
  Point need_lo{0, 0, 0}, need_hi{0, 0, 0};
  for (int a = 0; a < g.dim; ++a) {
    switch (e.kind) {
      case EventKind::Arm: need_lo[a] = -e.R; need_hi[a] = e.R; break;
      case EventKind::Ann:
      case EventKind::AnnInf: need_lo[a] = -2.0 * e.R; need_hi[a] = 2.0 * e.R; break;
      case EventKind::Cross: need_hi[a] = e.R; break;
      case EventKind::Tube: need_hi[a] = a == 0 ? e.R : tube_width(e); break;
    }
    const double lo = g.origin[a];
    const double hi = g.origin[a] + g.extent(a);
    if (lo > need_lo[a] + h + tol || hi < need_hi[a] - h - tol)
      throw DomainError("event geometry does not fit in the grid window");
  }

  std::size_t origin_cell = P;
  double origin_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < P; ++i) {
    const Point x = g.coord(i);
    bool in = false, src = false, tgt = false;
    switch (e.kind) {
      case EventKind::Arm: {
        const double r = radius(x);
        in = r <= e.R + tol;
        src = e.r_in > 0.0 && r <= e.r_in + tol;
        tgt = in && r > e.R - h + tol;
        if (r < origin_d) {
          origin_d = r;
          origin_cell = i;
        }
        break;
      }
      case EventKind::Ann:
      case EventKind::AnnInf: {
        const double r = e.kind == EventKind::Ann ? radius(x) : supnorm(x);
        in = r >= e.R - tol && r <= 2.0 * e.R + tol;
        src = in && r < e.R + h - tol;
        tgt = in && r > 2.0 * e.R - h + tol;
        break;
      }
      case EventKind::Cross:
      case EventKind::Tube: {
        in = true;
        for (int a = 0; a < g.dim; ++a)
          in = in && x[a] >= -tol && x[a] <= need_hi[a] + tol;
        src = in && x[0] < h - tol;
        tgt = in && x[0] > e.R - h + tol;
        break;
      }
    }
    geo.domain[i] = in ? 1 : 0;
    if (src) geo.source.push_back(i);
    if (tgt) geo.target.push_back(i);
  }
  if (e.kind == EventKind::Arm && e.r_in == 0.0) {
    if (origin_d > 0.5 * h * std::sqrt(static_cast<double>(g.dim)) + tol)
      throw DomainError("grid window does not contain the origin");
    geo.source = {origin_cell};
  }
  if (geo.source.empty() || geo.target.empty())
    throw DomainError("event terminal set is empty on this grid");
  return geo;
}

ComponentLabeling label_mask(const Grid& g, const std::vector<std::uint8_t>& mask) {
  const std::size_t P = g.size();
  if (mask.size() != P) throw DomainError("mask does not match the grid");
  UnionFind uf(P);
  for (std::size_t i = 0; i < P; ++i) {
    if (!mask[i]) continue;
    // only look backwards; forward neighbours will link to us later
    const auto m = g.multi_index(i);
    std::size_t stride = 1;
    for (int a = 0; a < g.dim; ++a) {
      if (m[a] > 0 && mask[i - stride]) uf.unite(i, i - stride);
      stride *= g.n[a];
    }
  }
  ComponentLabeling lab;
  lab.grid = g;
  lab.label.assign(P, -1);
  for (std::size_t i = 0; i < P; ++i) {
    if (!mask[i]) continue;
    const std::size_t r = uf.find(i);
    std::int32_t id;
    if (r == i) {
      id = static_cast<std::int32_t>(lab.count++);
      lab.sizes.push_back(0);
      const auto m = g.multi_index(i);
      lab.box_lo.push_back(m);
      lab.box_hi.push_back(m);
    } else {
      id = lab.label[r];
    }
    lab.label[i] = id;
    ++lab.sizes[id];
    const auto m = g.multi_index(i);
    for (int a = 0; a < 3; ++a) {
      lab.box_lo[id][a] = std::min(lab.box_lo[id][a], m[a]);
      lab.box_hi[id][a] = std::max(lab.box_hi[id][a], m[a]);
    }
  }
  return lab;
}

ComponentLabeling excursion_components(const GridField& f, double level,
                                       const std::vector<std::uint8_t>* domain) {
  const std::size_t P = f.grid.size();
  if (f.values.size() != P) throw DomainError("field does not match its grid");
  if (domain && domain->size() != P) throw DomainError("domain mask does not match the grid");
  std::vector<std::uint8_t> mask(P);
  for (std::size_t i = 0; i < P; ++i)
    mask[i] = f.values[i] <= level && (!domain || (*domain)[i]) ? 1 : 0;
  return label_mask(f.grid, mask);
}

bool detect_event(const ComponentLabeling& lab, const EventGeometry& geo) {
  std::vector<std::uint8_t> hit(lab.count, 0);
  for (std::size_t i : geo.source)
    if (lab.label[i] >= 0) hit[lab.label[i]] = 1;
  for (std::size_t i : geo.target)
    if (lab.label[i] >= 0 && hit[lab.label[i]]) return true;
  return false;
}

bool event_occurs(const GridField& f, const EventGeometry& geo, double level) {
  const Grid& g = f.grid;
  std::vector<std::uint8_t> state(g.size(), 0);  // 1 seen, 2 target
  for (std::size_t i : geo.target) state[i] = 2;
  std::vector<std::size_t> stack;
  for (std::size_t i : geo.source) {
    if (f.values[i] > level) continue;
    if (state[i] == 2) return true;
    if (state[i] == 0) {
      state[i] = 1;
      stack.push_back(i);
    }
  }
  bool found = false;
  while (!stack.empty() && !found) {
    const std::size_t i = stack.back();
    stack.pop_back();
    for_each_neighbour(g, i, [&](std::size_t j) {
      if (found || state[j] == 1 || !geo.domain[j] || f.values[j] > level) return;
      if (state[j] == 2) {
        found = true;
        return;
      }
      state[j] = 1;
      stack.push_back(j);
    });
  }
  return found;
}

bool detect_event(const GridField& f, const EventSpec& e) {
  return event_occurs(f, event_geometry(f.grid, e), e.level);
}

namespace {

// minimax path values from the source set, visiting cells in increasing
// order; stops early once `stop` returns true for a popped cell
template <class Stop>
void minimax_sweep(const GridField& f, const std::vector<std::uint8_t>& domain,
                   const std::vector<std::size_t>& source, Stop&& stop) {
  const Grid& g = f.grid;
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  std::vector<std::uint8_t> done(g.size(), 0);
  std::vector<double> best(g.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i : source) {
    if (!domain[i]) continue;
    best[i] = f.values[i];
    pq.push({best[i], i});
  }
  while (!pq.empty()) {
    const auto [v, i] = pq.top();
    pq.pop();
    if (done[i]) continue;
    done[i] = 1;
    if (stop(i, v)) return;
    for_each_neighbour(g, i, [&](std::size_t j) {
      if (done[j] || !domain[j]) return;
      const double w = std::max(v, f.values[j]);
      if (w < best[j]) {
        best[j] = w;
        pq.push({w, j});
      }
    });
  }
}

}  // namespace

double event_threshold(const GridField& f, const EventGeometry& geo) {
  std::vector<std::uint8_t> is_target(f.grid.size(), 0);
  for (std::size_t i : geo.target) is_target[i] = 1;
  double out = std::numeric_limits<double>::infinity();
  minimax_sweep(f, geo.domain, geo.source, [&](std::size_t i, double v) {
    if (!is_target[i]) return false;
    out = v;
    return true;
  });
  return out;
}

std::vector<double> arm_thresholds(const GridField& f, const std::vector<double>& radii,
                                   double r_in) {
  if (radii.empty()) return {};
  const double Rmax = *std::max_element(radii.begin(), radii.end());
  EventSpec e;
  e.kind = EventKind::Arm;
  e.R = Rmax;
  e.r_in = r_in;
  const auto geo = event_geometry(f.grid, e);
  const double h = f.grid.h;
  const double tol = 1e-9 * h;
  // thresholds per radius: first popped cell inside each band
  std::vector<double> out(radii.size(), std::numeric_limits<double>::infinity());
  std::size_t remaining = radii.size();
  minimax_sweep(f, geo.domain, geo.source, [&](std::size_t i, double v) {
    const Point x = f.grid.coord(i);
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    for (std::size_t k = 0; k < radii.size(); ++k) {
      if (std::isinf(out[k]) && r <= radii[k] + tol && r > radii[k] - h + tol) {
        out[k] = v;
        --remaining;
      }
    }
    return remaining == 0;
  });
  return out;
}

std::vector<double> component_diameters(const ComponentLabeling& lab) {
  const Grid& g = lab.grid;
  std::vector<std::vector<Point>> pts(lab.count);
  for (std::size_t i = 0; i < lab.label.size(); ++i) {
    const std::int32_t id = lab.label[i];
    if (id < 0) continue;
    if (g.dim == 3 && lab.sizes[id] > 1000) {
      // interior cells cannot be extreme points
      bool boundary = false;
      std::size_t nb = 0;
      for_each_neighbour(g, i, [&](std::size_t j) {
        ++nb;
        if (lab.label[j] != id) boundary = true;
      });
      if (!boundary && nb == 6) continue;
    }
    pts[id].push_back(g.coord(i));
  }
  std::vector<double> out(lab.count, 0.0);
  for (std::size_t c = 0; c < lab.count; ++c) {
    const auto& p = pts[c];
    if (p.size() <= 1000 || g.dim == 3) {
      out[c] = pairwise_diameter(p);
    } else if (g.dim == 1) {
      double lo = p.front()[0], hi = p.front()[0];
      for (const auto& q : p) {
        lo = std::min(lo, q[0]);
        hi = std::max(hi, q[0]);
      }
      out[c] = hi - lo;
    } else {
      out[c] = planar_diameter(p);
    }
  }
  return out;
}

double largest_diameter(const ComponentLabeling& lab) {
  if (lab.count == 0) return 0.0;
  // a component cannot be wider than its bounding-box diagonal; skip those
  // that cannot beat the current best
  const Grid& g = lab.grid;
  std::vector<std::size_t> order(lab.count);
  std::iota(order.begin(), order.end(), 0);
  auto diag = [&](std::size_t c) {
    double s = 0.0;
    for (int a = 0; a < 3; ++a) {
      const double d = static_cast<double>(lab.box_hi[c][a] - lab.box_lo[c][a]) * g.h;
      s += d * d;
    }
    return std::sqrt(s);
  };
  std::vector<double> bound(lab.count);
  for (std::size_t c = 0; c < lab.count; ++c) bound[c] = diag(c);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return bound[a] > bound[b]; });
  double best = 0.0;
  // the diameter is at least the longest bounding-box side
  std::vector<std::int32_t> wanted;
  for (std::size_t c : order) {
    if (bound[c] <= best) break;
    double side = 0.0;
    for (int a = 0; a < 3; ++a)
      side = std::max(side, static_cast<double>(lab.box_hi[c][a] - lab.box_lo[c][a]) * g.h);
    best = std::max(best, side);
    wanted.push_back(static_cast<std::int32_t>(c));
  }
  // exact diameters for the candidates only
  ComponentLabeling sub;
  sub.grid = g;
  sub.label.assign(lab.label.size(), -1);
  std::vector<std::int32_t> remap(lab.count, -1);
  for (std::size_t k = 0; k < wanted.size(); ++k) remap[wanted[k]] = static_cast<std::int32_t>(k);
  sub.count = wanted.size();
  for (std::size_t k = 0; k < wanted.size(); ++k) {
    sub.sizes.push_back(lab.sizes[wanted[k]]);
    sub.box_lo.push_back(lab.box_lo[wanted[k]]);
    sub.box_hi.push_back(lab.box_hi[wanted[k]]);
  }
  for (std::size_t i = 0; i < lab.label.size(); ++i)
    if (lab.label[i] >= 0) sub.label[i] = remap[lab.label[i]];
  double out = 0.0;
  for (double d : component_diameters(sub)) out = std::max(out, d);
  return out;
}

namespace {

// runs fn(trial, field) for every trial; spectral trials come in pairs from
// one synthesis. Work is split into contiguous blocks per thread and the
// caller stores results by trial index, so output does not depend on the
// thread count.
template <class Fn>
void for_each_trial(const FieldSampler& s, std::size_t trials, std::uint64_t seed,
                    unsigned threads, Fn&& fn) {
  const std::size_t pairs = (trials + 1) / 2;
  auto work = [&](std::size_t p0, std::size_t p1) {
    for (std::size_t p = p0; p < p1; ++p) {
      if (s.dense()) {
        for (std::size_t t = 2 * p; t < std::min(2 * p + 2, trials); ++t) fn(t, s.sample(seed, t));
      } else {
        auto pr = s.sample_pair(seed, p);
        fn(2 * p, std::move(pr.first));
        if (2 * p + 1 < trials) fn(2 * p + 1, std::move(pr.second));
      }
    }
  };
  threads = std::max(1u, threads);
  if (threads == 1 || pairs < 2) {
    work(0, pairs);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (pairs + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t a = std::min(pairs, t * chunk), b = std::min(pairs, a + chunk);
    if (a < b) pool.emplace_back(work, a, b);
  }
  for (auto& th : pool) th.join();
}

Estimate naive_from_hits(const EventSpec& e, std::size_t hits, std::size_t trials,
                         std::uint64_t seed) {
  Estimate est;
  est.event = e;
  est.method = "naive";
  est.trials = trials;
  est.weighted_sum = static_cast<double>(hits);
  est.p_hat = static_cast<double>(hits) / static_cast<double>(trials);
  est.se = std::sqrt(est.p_hat * (1.0 - est.p_hat) / static_cast<double>(trials));
  const auto ci = stats::wilson(hits, trials);
  est.ci_lo = ci.lo;
  est.ci_hi = ci.hi;
  est.ess = static_cast<double>(trials);
  est.seed = seed;
  return est;
}

void check_trials(std::size_t trials) {
  if (trials < 100) throw DomainError("Monte Carlo estimates need at least 100 trials");
}

}  // namespace

Estimate mc_estimate(const Kernel& k, const Grid& g, const EventSpec& e, std::size_t trials,
                     std::uint64_t seed, const McOptions& opts) {
  check_trials(trials);
  FieldSampler s(k, g, opts.sampler);
  const auto geo = event_geometry(g, e);
  std::vector<std::uint8_t> hit(trials, 0);
  for_each_trial(s, trials, seed, opts.threads, [&](std::size_t t, const GridField& f) {
    hit[t] = event_occurs(f, geo, e.level) ? 1 : 0;
  });
  const std::size_t hits = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
  auto est = naive_from_hits(e, hits, trials, seed);
  est.warnings = s.warnings();
  return est;
}

std::vector<Estimate> mc_estimate_levels(const Kernel& k, const Grid& g, const EventSpec& e,
                                         const std::vector<double>& levels, std::size_t trials,
                                         std::uint64_t seed, const McOptions& opts) {
  check_trials(trials);
  FieldSampler s(k, g, opts.sampler);
  const auto geo = event_geometry(g, e);
  std::vector<double> thr(trials);
  for_each_trial(s, trials, seed, opts.threads,
                 [&](std::size_t t, const GridField& f) { thr[t] = event_threshold(f, geo); });
  std::vector<Estimate> out;
  for (double l : levels) {
    const auto hits = static_cast<std::size_t>(
        std::count_if(thr.begin(), thr.end(), [l](double v) { return v <= l; }));
    EventSpec el = e;
    el.level = l;
    out.push_back(naive_from_hits(el, hits, trials, seed));
    out.back().warnings = s.warnings();
  }
  return out;
}

std::vector<Estimate> mc_estimate_arm_radii(const Kernel& k, double h, double level,
                                            const std::vector<double>& radii,
                                            std::size_t trials, std::uint64_t seed,
                                            const McOptions& opts) {
  check_trials(trials);
  if (radii.empty()) return {};
  EventSpec e;
  e.kind = EventKind::Arm;
  e.R = *std::max_element(radii.begin(), radii.end());
  const Grid g = event_window(e, k.dim(), h);
  FieldSampler s(k, g, opts.sampler);
  std::vector<std::vector<double>> thr(trials);
  for_each_trial(s, trials, seed, opts.threads,
                 [&](std::size_t t, const GridField& f) { thr[t] = arm_thresholds(f, radii); });
  std::vector<Estimate> out;
  for (std::size_t r = 0; r < radii.size(); ++r) {
    std::size_t hits = 0;
    for (const auto& v : thr) hits += v[r] <= level ? 1 : 0;
    EventSpec er = e;
    er.R = radii[r];
    er.level = level;
    out.push_back(naive_from_hits(er, hits, trials, seed));
    out.back().warnings = s.warnings();
  }
  return out;
}

std::vector<std::size_t> default_shift_points(const Grid& g, const EventSpec& e, int direction,
                                              int directions) {
  if (directions != 1 && directions != 2 && directions != 4 && directions != 8)
    throw DomainError("shift directions must be 1, 2, 4 or 8");
  const bool radial = e.kind == EventKind::Arm || e.kind == EventKind::Ann ||
                      e.kind == EventKind::AnnInf;
  if (directions > 1 && !radial)
    throw DomainError("rotated shifts are only defined for arm and annulus events");
  if (g.dim < 2 && directions > 2) throw DomainError("too many shift directions for d = 1");
  // straight segment along the first axis, or a rotated copy about 0
  double x0 = 0.0, x1 = e.R, y = 0.0;
  switch (e.kind) {
    case EventKind::Arm: x0 = 0.0; x1 = e.R; break;
    case EventKind::Ann:
    case EventKind::AnnInf: x0 = e.R; x1 = 2.0 * e.R; break;
    case EventKind::Cross: y = 0.5 * e.R; break;
    case EventKind::Tube: y = 0.5 * std::pow(e.R, e.rho); break;
  }
  const double h = g.h;
  const int step = 8 / directions;
  static const int dirs[8][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
  const int* d = dirs[(direction % directions) * step];
  const double len = std::sqrt(double(d[0] * d[0] + d[1] * d[1]));
  std::vector<std::size_t> out;
  const auto i0 = static_cast<long>(std::ceil(x0 / (h * len) - 1e-9));
  const auto i1 = static_cast<long>(std::floor(x1 / (h * len) + 1e-9));
  for (long i = i0; i <= i1; ++i) {
    const double pos[3] = {i * d[0] * h, radial ? i * d[1] * h : y, 0.0};
    std::array<std::size_t, 3> m{0, 0, 0};
    bool ok = true;
    for (int a = 0; a < g.dim; ++a) {
      const double q = (pos[a] - g.origin[a]) / h;
      const double r = std::round(q);
      if (r < 0.0 || r > double(g.n[a] - 1) || (radial && std::abs(q - r) > 1e-6)) ok = false;
      m[a] = static_cast<std::size_t>(std::max(0.0, r));
    }
    if (!ok) throw DomainError("shift segment leaves the grid window");
    out.push_back(g.index(m[0], m[1], m[2]));
  }
  if (out.size() < 2) throw DomainError("shift segment has fewer than two grid points");
  return out;
}

ShiftSpec shift_for_points(const Kernel& k, const Grid& g, const std::vector<std::size_t>& pts,
                           double amplitude, int direction, const CapacityOptions& copts) {
  if (pts.size() < 2) throw DomainError("shift domain needs at least two points");
  DiscretizedDomain d;
  // evenly spaced points on one line: intervals in arc length along it
  // (the kernel is isotropic), otherwise lattice squares
  const Point p0 = g.coord(pts.front());
  const Point p1 = g.coord(pts.back());
  const double L = std::sqrt(dist2(p0, p1));
  const double tol = 1e-9 * g.h;
  const double gap = L / static_cast<double>(pts.size() - 1);
  bool on_line = L > 0.0;
  for (std::size_t i = 0; i < pts.size() && on_line; ++i) {
    const Point p = g.coord(pts[i]);
    const double t = gap * static_cast<double>(i);
    for (int a = 0; a < 3; ++a)
      on_line = on_line && std::abs(p0[a] + (p1[a] - p0[a]) * t / L - p[a]) <= tol;
  }
  if (on_line) {
    d.kind = DomainKind::Segment;
    d.cell_dim = 1;
    d.cell_size = gap;
    for (std::size_t i = 0; i < pts.size(); ++i)
      d.cells.push_back({{gap * static_cast<double>(i), 0.0, 0.0}, 0.5 * gap});
  } else {
    d.kind = DomainKind::Box;
    d.cell_dim = 2;
    d.cell_size = g.h;
    for (std::size_t i : pts) d.cells.push_back({g.coord(i), 0.5 * g.h});
  }
  const auto cap = capacity(d, k, copts);
  std::ostringstream desc;
  desc << "equilibrium shift on " << pts.size() << " points, amplitude " << amplitude
       << ", capacity " << cap.capacity;
  return make_shift(cap, pts, amplitude, direction, desc.str());
}

Estimate is_estimate(const Kernel& k, const Grid& g, const EventSpec& e, std::size_t trials,
                     std::uint64_t seed, const IsOptions& is, const McOptions& opts) {
  check_trials(trials);
  const double amp = is.amplitude.value_or(is.level_target - e.level);
  if (!(amp >= 0.0)) throw DomainError("shift amplitude must be >= 0 (target above the level)");
  const auto J = static_cast<std::size_t>(std::max(1, is.directions));
  if (J > 1 && !is.shift_points.empty())
    throw DomainError("custom shift points cannot be combined with rotated shifts");
  if (trials % J != 0) throw DomainError("trials must be a multiple of the shift directions");
  FieldSampler s(k, g, opts.sampler);
  const auto geo = event_geometry(g, e);
  std::vector<Tilt> tilts;
  for (std::size_t j = 0; j < J; ++j) {
    const auto pts = is.shift_points.empty()
                         ? default_shift_points(g, e, static_cast<int>(j), static_cast<int>(J))
                         : is.shift_points;
    // sub-level events are favoured by pushing the field down
    tilts.emplace_back(s, shift_for_points(k, g, pts, amp, -1, is.capacity));
  }
  std::vector<double> y(trials, 0.0);
  if (is.rao_blackwell) {
    struct Profile {
      std::vector<std::size_t> pts;
      std::vector<double> w;
      std::vector<double> phi;  // C mu / E
      double sd = 0.0;          // sqrt(E), the standard deviation of Z
    };
    std::vector<Profile> prof;
    for (const auto& tl : tilts) {
      Profile p;
      p.pts = tl.spec().points;
      p.w = tl.spec().weights;
      std::vector<double> mu(g.size(), 0.0);
      for (std::size_t i = 0; i < p.pts.size(); ++i) mu[p.pts[i]] += p.w[i];
      p.phi = s.apply_covariance(mu);
      std::vector<double> prod;
      for (std::size_t i = 0; i < p.pts.size(); ++i) prod.push_back(p.w[i] * p.phi[p.pts[i]]);
      const double E = stats::pairwise_sum(prod);
      for (std::size_t i = 0; i < g.size(); ++i) {
        p.phi[i] /= E;
        if (geo.domain[i] && !(p.phi[i] > 0.0))
          throw NumericError("conditional estimator needs C mu > 0 on the event domain",
                             p.phi[i]);
      }
      p.sd = std::sqrt(E);
      prof.push_back(std::move(p));
    }
    for_each_trial(s, trials, seed, opts.threads, [&](std::size_t t, GridField f) {
      std::vector<double> pj(J);
      GridField u;
      u.grid = g;
      u.values.resize(g.size());
      for (std::size_t j = 0; j < J; ++j) {
        const auto& p = prof[j];
        std::vector<double> prod(p.pts.size());
        for (std::size_t i = 0; i < p.pts.size(); ++i) prod[i] = p.w[i] * f.values[p.pts[i]];
        const double Z = stats::pairwise_sum(prod);
        // event <=> Z' <= min over a path of (level - f_perp) / phi; store
        // the negation so the minimax sweep returns -z*
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (!geo.domain[i]) continue;
          const double fperp = f.values[i] - Z * p.phi[i];
          u.values[i] = -(e.level - fperp) / p.phi[i];
        }
        const double zstar = -event_threshold(u, geo);
        pj[j] = stats::normal_cdf(zstar / p.sd);
      }
      y[t] = stats::pairwise_sum(pj) / static_cast<double>(J);
    });
  } else {
    for_each_trial(s, trials, seed, opts.threads, [&](std::size_t t, GridField f) {
      const auto ts = tilts[t % J].apply(std::move(f));
      if (!event_occurs(ts.field, geo, e.level)) return;
      if (J == 1) {
        y[t] = std::exp(ts.log_weight);
        return;
      }
      // equal mixture: dP/dQ = 1 / mean_j exp(-log_weight_j)
      std::vector<double> v(J);
      for (std::size_t j = 0; j < J; ++j) v[j] = -tilts[j].log_weight(ts.field.values);
      const double mx = *std::max_element(v.begin(), v.end());
      for (auto& x : v) x = std::exp(x - mx);
      y[t] = std::exp(-mx - std::log(stats::pairwise_sum(v) / static_cast<double>(J)));
    });
  }
  if (amp == 0.0 && !is.rao_blackwell) {
    // zero shift: every weight is exactly 1, so report the naive estimate
    std::size_t hits = 0;
    for (double v : y) hits += v != 0.0;
    if (static_cast<double>(hits) != stats::pairwise_sum(y))
      throw NumericError("zero shift produced a non-unit weight", stats::pairwise_sum(y));
    Estimate est = naive_from_hits(e, hits, trials, seed);
    est.method = "is";
    est.amplitude = 0.0;
    est.warnings = s.warnings();
    return est;
  }
  Estimate est;
  est.event = e;
  est.method = is.rao_blackwell ? "is_rb" : "is";
  est.trials = trials;
  est.seed = seed;
  est.amplitude = amp;
  est.weighted_sum = stats::pairwise_sum(y);
  const double n = static_cast<double>(trials);
  est.p_hat = est.weighted_sum / n;
  std::vector<double> sq(trials);
  for (std::size_t t = 0; t < trials; ++t) sq[t] = (y[t] - est.p_hat) * (y[t] - est.p_hat);
  est.se = std::sqrt(stats::pairwise_sum(sq) / (n - 1.0) / n);
  est.ci_lo = std::max(0.0, est.p_hat - stats::z95() * est.se);
  est.ci_hi = est.p_hat + stats::z95() * est.se;
  for (std::size_t t = 0; t < trials; ++t) sq[t] = y[t] * y[t];
  const double s2 = stats::pairwise_sum(sq);
  est.ess = s2 > 0.0 ? est.weighted_sum * est.weighted_sum / s2 : 0.0;
  est.warnings = s.warnings();
  if (est.ess < is.min_ess) {
    est.reliable = false;
    std::ostringstream msg;
    msg << "effective sample size " << est.ess << " below " << is.min_ess;
    est.warnings.push_back(msg.str());
  }
  return est;
}

stats::MeanSe tilt_weight_mean(const FieldSampler& s, const ShiftSpec& spec, std::size_t trials,
                               std::uint64_t seed) {
  const Tilt tilt(s, spec);
  std::vector<double> w(trials);
  for_each_trial(s, trials, seed, 1, [&](std::size_t t, GridField f) {
    w[t] = std::exp(tilt.apply(std::move(f)).log_weight);
  });
  return stats::mean_se(w);
}

std::vector<CorrelationLengthRow> correlation_length(const Kernel& k,
                                                     const std::vector<double>& levels,
                                                     std::uint64_t seed,
                                                     const CorrelationLengthOptions& opts) {
  if (!(opts.eps > 0.0 && opts.eps < 1.0 / (2.0 * std::exp(1.0))))
    throw DomainError("eps must lie in (0, 1/(2e))");
  if (levels.empty()) throw DomainError("no levels given");
  for (double l : levels)
    if (!(l < 0.0)) throw DomainError("correlation length levels must be negative");
  if (!(opts.R0 > 0.0) || !(opts.R_max >= opts.R0)) throw DomainError("bad R range");

  const double h = opts.h;
  auto snap = [h](double R) { return std::max(h, std::round(R / h) * h); };
  std::map<double, std::vector<Estimate>> cache;
  auto eval = [&](double R) -> const std::vector<Estimate>& {
    auto it = cache.find(R);
    if (it != cache.end()) return it->second;
    EventSpec e;
    e.kind = EventKind::Cross;
    e.R = R;
    const Grid g = event_window(e, k.dim(), h);
    return cache[R] = mc_estimate_levels(k, g, e, levels, opts.trials, seed, opts.mc);
  };
  auto passes = [&](double R, std::size_t li) { return eval(R)[li].ci_hi < opts.eps; };

  std::vector<CorrelationLengthRow> rows(levels.size());
  std::vector<double> lo(levels.size(), 0.0), hi(levels.size(), 0.0);
  // doubling phase, shared by all levels
  for (double R = snap(opts.R0); R <= opts.R_max * (1 + 1e-12); R = snap(2.0 * R)) {
    bool all = true;
    for (std::size_t li = 0; li < levels.size(); ++li) {
      if (hi[li] > 0.0) continue;
      if (passes(R, li))
        hi[li] = R;
      else
        lo[li] = R;
      all = all && hi[li] > 0.0;
    }
    if (all) break;
  }
  for (std::size_t li = 0; li < levels.size(); ++li) {
    auto& row = rows[li];
    row.level = levels[li];
    if (hi[li] == 0.0) {
      row.censored = true;
      row.R_lo = lo[li];
      row.xi = lo[li];
      row.at_xi = eval(lo[li])[li];
      continue;
    }
    for (int step = 0; step < opts.refine_steps && lo[li] > 0.0; ++step) {
      const double mid = snap(0.5 * (lo[li] + hi[li]));
      if (mid <= lo[li] || mid >= hi[li]) break;
      if (passes(mid, li))
        hi[li] = mid;
      else
        lo[li] = mid;
    }
    row.R_lo = lo[li];
    row.R_hi = hi[li];
    row.xi = hi[li];
    row.at_xi = eval(hi[li])[li];
  }
  return rows;
}

}  // namespace gaussperc
