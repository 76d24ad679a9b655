#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>

#include "gaussperc/errors.hpp"
#include "gaussperc/percolation.hpp"

using namespace gaussperc;

namespace {

GridField field_from(const Grid& g, std::vector<double> v) {
  GridField f;
  f.grid = g;
  f.values = std::move(v);
  return f;
}

// component index per cell by BFS, in scan order of first cell
std::vector<int> bfs_components(const Grid& g, const std::vector<std::uint8_t>& mask) {
  const int nx = static_cast<int>(g.n[0]), ny = static_cast<int>(g.n[1]);
  std::vector<int> comp(mask.size(), -1);
  int next = 0;
  for (int s = 0; s < nx * ny; ++s) {
    if (!mask[s] || comp[s] >= 0) continue;
    std::deque<int> q{s};
    comp[s] = next;
    while (!q.empty()) {
      const int c = q.front();
      q.pop_front();
      const int x = c % nx, y = c / nx;
      const int nb[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
      for (auto& p : nb) {
        if (p[0] < 0 || p[0] >= nx || p[1] < 0 || p[1] >= ny) continue;
        const int j = p[0] + nx * p[1];
        if (mask[j] && comp[j] < 0) {
          comp[j] = next;
          q.push_back(j);
        }
      }
    }
    ++next;
  }
  return comp;
}

double pairwise_diameter(const std::vector<Point>& pts) {
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      best = std::max(best, std::hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]));
  return best;
}

}  // namespace

TEST_CASE("labeling agrees with BFS on random 8x8 masks") {
  const Grid g = make_grid(2, 7.0, 1.0);
  std::mt19937_64 eng(2024);
  int agree = 0;
  for (int c = 0; c < 1000; ++c) {
    const double p = 0.2 + 0.6 * (c % 7) / 6.0;
    std::bernoulli_distribution b(p);
    std::vector<std::uint8_t> mask(g.size());
    for (auto& m : mask) m = b(eng) ? 1 : 0;
    const auto lab = label_mask(g, mask);
    const auto ref = bfs_components(g, mask);
    bool ok = true;
    std::size_t ncomp = 0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
      ok = ok && lab.label[i] == ref[i];
      ncomp = std::max<std::size_t>(ncomp, ref[i] + 1);
    }
    ok = ok && lab.count == ncomp;
    for (std::size_t k = 0; k < ncomp && ok; ++k)
      ok = lab.sizes[k] == static_cast<std::size_t>(std::count(ref.begin(), ref.end(), int(k)));
    agree += ok ? 1 : 0;
  }
  CHECK(agree == 1000);
}

TEST_CASE("excursion components at extreme levels") {
  const Grid g = make_grid(2, 3.0, 1.0);
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(1.7 * i);
  const auto f = field_from(g, v);
  CHECK(excursion_components(f, -2.0).count == 0);
  const auto all = excursion_components(f, 2.0);
  CHECK(all.count == 1);
  CHECK(all.sizes[0] == g.size());
}

TEST_CASE("checkerboard has one component per low cell") {
  const Grid g = make_grid(2, 3.0, 1.0);
  std::vector<double> v(16);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) v[x + 4 * y] = (x + y) % 2 == 0 ? -1.0 : 1.0;
  const auto lab = excursion_components(field_from(g, v), 0.0);
  CHECK(lab.count == 8);
  CHECK(largest_diameter(lab) == 0.0);
}

TEST_CASE("single path fixture on an 8x8 box") {
  // low cells form a monotone staircase from the left column to the right
  const double h = 1.0;
  EventSpec e;
  e.kind = EventKind::Cross;
  e.R = 7.0;
  const Grid g = event_window(e, 2, h);
  REQUIRE(g.n[0] == 8);
  REQUIRE(g.n[1] == 8);
  std::vector<double> v(g.size(), 1.0);
  const int path[][2] = {{0, 2}, {1, 2}, {2, 2}, {2, 3}, {3, 3}, {4, 3}, {4, 4},
                         {5, 4}, {6, 4}, {6, 5}, {7, 5}};
  for (auto& p : path) v[g.index(p[0], p[1])] = -1.0;
  auto f = field_from(g, v);
  e.level = 0.0;
  CHECK(detect_event(f, e));
  CHECK(event_threshold(f, event_geometry(g, e)) == -1.0);
  v[g.index(4, 3)] = 1.0;
  f = field_from(g, v);
  CHECK_FALSE(detect_event(f, e));
}

TEST_CASE("arm fixture touches the origin cell or not") {
  EventSpec e;
  e.kind = EventKind::Arm;
  e.R = 4.0;
  e.level = 0.0;
  const Grid g = event_window(e, 2, 1.0);
  REQUIRE(g.n[0] == 9);
  std::vector<double> v(g.size(), 1.0);
  // straight ray from (1, 0) to (4, 0)
  for (int x = 5; x <= 8; ++x) v[g.index(x, 4)] = -1.0;
  CHECK_FALSE(detect_event(field_from(g, v), e));
  v[g.index(4, 4)] = -1.0;
  CHECK(detect_event(field_from(g, v), e));
}

TEST_CASE("events on constant fields") {
  for (auto kind : {EventKind::Arm, EventKind::Ann, EventKind::AnnInf, EventKind::Cross,
                    EventKind::Tube}) {
    EventSpec e;
    e.kind = kind;
    e.R = 4.0;
    e.level = 0.0;
    const Grid g = event_window(e, 2, 0.5);
    CHECK(detect_event(field_from(g, std::vector<double>(g.size(), -1.0)), e));
    CHECK_FALSE(detect_event(field_from(g, std::vector<double>(g.size(), 1.0)), e));
  }
}

TEST_CASE("event geometry must fit the window") {
  EventSpec e;
  e.kind = EventKind::Cross;
  e.R = 8.0;
  CHECK_THROWS_AS(event_geometry(make_grid(2, 4.0, 0.5), e), DomainError);
}

TEST_CASE("BFS, labeling and thresholds agree on sampled fields") {
  const Kernel k = make_cauchy(0.5, 2);
  for (auto kind : {EventKind::Arm, EventKind::Cross, EventKind::Ann}) {
    EventSpec e;
    e.kind = kind;
    e.R = 4.0;
    const Grid g = event_window(e, 2, 0.25);
    FieldSampler s(k, g);
    const auto geo = event_geometry(g, e);
    for (std::uint64_t t = 0; t < 40; ++t) {
      const auto f = s.sample(1, t);
      const double thr = event_threshold(f, geo);
      for (double l : {-1.0, -0.3, 0.0, 0.4}) {
        const bool bfs = event_occurs(f, geo, l);
        const auto lab = excursion_components(f, l, &geo.domain);
        CHECK(bfs == detect_event(lab, geo));
        CHECK(bfs == (thr <= l));
      }
    }
  }
}

TEST_CASE("diameters") {
  const Grid g = make_grid(2, 9.0, 0.5);
  SUBCASE("empty") {
    const auto lab = label_mask(g, std::vector<std::uint8_t>(g.size(), 0));
    CHECK(largest_diameter(lab) == 0.0);
  }
  SUBCASE("straight row") {
    std::vector<std::uint8_t> m(g.size(), 0);
    for (int x = 3; x < 3 + 7; ++x) m[g.index(x, 5)] = 1;
    CHECK(largest_diameter(label_mask(g, m)) == doctest::Approx(6 * 0.5));
  }
  SUBCASE("L shape") {
    std::vector<std::uint8_t> m(g.size(), 0);
    for (int x = 2; x <= 10; ++x) m[g.index(x, 2)] = 1;
    for (int y = 2; y <= 8; ++y) m[g.index(2, y)] = 1;
    CHECK(largest_diameter(label_mask(g, m)) == doctest::Approx(0.5 * std::hypot(8.0, 6.0)));
  }
}

TEST_CASE("hull diameters match pairwise distances") {
  const Kernel k = make_cauchy(0.5, 2);
  const Grid g = make_grid(2, 24.0, 0.25);
  FieldSampler s(k, g);
  for (std::uint64_t t = 0; t < 6; ++t) {
    const auto f = s.sample(4, t);
    for (double l : {-0.5, 0.0, 0.5}) {
      const auto lab = excursion_components(f, l);
      const auto d = component_diameters(lab);
      std::vector<std::vector<Point>> pts(lab.count);
      for (std::size_t i = 0; i < g.size(); ++i)
        if (lab.label[i] >= 0) pts[lab.label[i]].push_back(g.coord(i));
      for (std::size_t c = 0; c < lab.count; ++c)
        CHECK(d[c] == doctest::Approx(pairwise_diameter(pts[c])).epsilon(1e-12));
    }
  }
}

TEST_CASE("naive estimates") {
  const Kernel k = make_cauchy(0.5, 2);
  EventSpec e;
  e.kind = EventKind::Cross;
  e.R = 4.0;
  e.level = -10.0;
  const Grid g = event_window(e, 2, 0.5);
  const auto far = mc_estimate(k, g, e, 200, 1);
  CHECK(far.p_hat == 0.0);
  CHECK(far.ci_lo == 0.0);
  CHECK(far.ci_hi > 0.0);

  e.level = 0.0;
  const auto a = mc_estimate(k, g, e, 200, 7);
  const auto b = mc_estimate(k, g, e, 200, 7);
  CHECK(a.p_hat == b.p_hat);
  McOptions two;
  two.threads = 2;
  CHECK(mc_estimate(k, g, e, 200, 7, two).p_hat == a.p_hat);

  const auto lv = mc_estimate_levels(k, g, e, {-0.6, -0.3, 0.0, 0.3}, 300, 3);
  for (std::size_t i = 1; i < lv.size(); ++i) CHECK(lv[i].p_hat >= lv[i - 1].p_hat);

  const auto ar = mc_estimate_arm_radii(k, 0.5, -0.5, {2.0, 4.0, 8.0}, 300, 3);
  for (std::size_t i = 1; i < ar.size(); ++i) CHECK(ar[i].p_hat <= ar[i - 1].p_hat);
}

TEST_CASE("zero-amplitude importance sampling is the naive estimate") {
  const Kernel k = make_cauchy(0.5, 2);
  EventSpec e;
  e.kind = EventKind::Arm;
  e.R = 4.0;
  e.level = -1.0;
  const Grid g = event_window(e, 2, 0.5);
  IsOptions is;
  is.amplitude = 0.0;
  const auto a = is_estimate(k, g, e, 400, 9, is);
  const auto b = mc_estimate(k, g, e, 400, 9);
  CHECK(a.p_hat == b.p_hat);
  CHECK(a.weighted_sum == b.weighted_sum);
}

TEST_CASE("importance sampling agrees with naive at moderate probability") {
  const Kernel k = make_cauchy(0.5, 2);
  EventSpec e;
  e.kind = EventKind::Arm;
  e.R = 4.0;
  e.level = -0.5;
  const Grid g = event_window(e, 2, 0.5);
  const auto nv = mc_estimate(k, g, e, 2000, 21);
  REQUIRE(nv.p_hat >= 0.05);
  for (bool rb : {false, true}) {
    IsOptions is;
    is.directions = 4;
    is.rao_blackwell = rb;
    const auto im = is_estimate(k, g, e, 2000, 22, is);
    CHECK(std::abs(im.p_hat - nv.p_hat) < 3 * std::hypot(im.se, nv.se));
  }
}

TEST_CASE("correlation length argument checks") {
  CorrelationLengthOptions o;
  o.eps = 0.2;
  CHECK_THROWS_AS(correlation_length(make_cauchy(0.5, 2), {-0.5}, 1, o), DomainError);
  o.eps = 0.1;
  CHECK_THROWS_AS(correlation_length(make_cauchy(0.5, 2), {0.5}, 1, o), DomainError);
}

TEST_CASE("event names round trip") {
  for (auto kind : {EventKind::Arm, EventKind::Ann, EventKind::AnnInf, EventKind::Cross,
                    EventKind::Tube})
    CHECK(event_from_string(to_string(kind)) == kind);
  CHECK_THROWS(event_from_string("loop"));
}
