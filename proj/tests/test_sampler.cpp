#include <doctest.h>

#include <cmath>

#include "gaussperc/capacity.hpp"
#include "gaussperc/errors.hpp"
#include "gaussperc/percolation.hpp"
#include "gaussperc/rng.hpp"
#include "gaussperc/sampler.hpp"
#include "gaussperc/stats.hpp"

using namespace gaussperc;

namespace {

// one-point marginal over n independent fields; each field contributes the
// value at `idx`
template <class Draw>
std::vector<double> marginal(std::size_t n, std::size_t idx, Draw draw) {
  std::vector<double> x;
  for (std::size_t t = 0; t < n; ++t) x.push_back(draw(t).values[idx]);
  return x;
}

void check_normal(const std::vector<double>& x, double sd) {
  const double a2 = stats::anderson_darling(x, false, 0.0, sd);
  CHECK(a2 < stats::anderson_darling_critical_5pct(false));
}

}  // namespace

TEST_CASE("grid construction") {
  const Grid g = make_grid(2, 4.0, 0.5);
  CHECK(g.n[0] == 9);
  CHECK(g.n[1] == 9);
  CHECK(g.n[2] == 1);
  CHECK_THROWS_AS(make_grid(2, 4.1, 0.5), DomainError);
  CHECK_THROWS_AS(make_grid(2, 4.0, 0.0), DomainError);
  const Grid c = centered_grid(2, 2.0, 0.5);
  CHECK(c.coord(0)[0] == -2.0);
  CHECK(c.coord(c.size() - 1)[1] == 2.0);
  CHECK(nice_fft_size(7) == 8);
  CHECK(nice_fft_size(11) == 12);
  CHECK(nice_fft_size(31) == 32);
}

TEST_CASE("riesz kernels cannot be sampled") {
  try {
    sample_field(make_riesz(0.5, 2), make_grid(2, 2.0, 0.5), 1);
    FAIL("expected an exception");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("capacity-only kernel") != std::string::npos);
  }
}

TEST_CASE("sampling is deterministic") {
  const Kernel k = make_cauchy(0.5, 2);
  SamplerOptions sp;
  sp.force_spectral = true;
  for (const auto& o : {SamplerOptions{}, sp}) {
    const Grid g = make_grid(2, 8.0, 0.5);
    const auto a = sample_field(k, g, 42, o);
    const auto b = sample_field(k, g, 42, o);
    const auto c = sample_field(k, g, 43, o);
    CHECK(a.values == b.values);
    CHECK(a.values != c.values);
  }
  // a trial drawn alone equals the same trial drawn as part of a pair
  FieldSampler s(k, make_grid(2, 8.0, 0.5), sp);
  const auto pr = s.sample_pair(9, 3);
  CHECK(pr.first.values == s.sample(9, 6).values);
  CHECK(pr.second.values == s.sample(9, 7).values);
}

TEST_CASE("spectral budget") {
  SamplerOptions o;
  o.force_spectral = true;
  o.max_torus_points = 1000;
  CHECK_THROWS_AS(FieldSampler(make_cauchy(0.5, 2), make_grid(2, 16.0, 0.5), o), ResourceError);
}

TEST_CASE("marginals are standard normal on every path") {
  const Kernel k = make_cauchy(1.0, 2);
  const Grid g = make_grid(2, 3.0, 0.5);
  SamplerOptions sp;
  sp.force_spectral = true;
  FieldSampler dense(k, g);
  FieldSampler spec(k, g, sp);
  REQUIRE(dense.dense());
  REQUIRE_FALSE(spec.dense());
  const std::size_t n = 10000;
  SUBCASE("dense") { check_normal(marginal(n, 10, [&](auto t) { return dense.sample(1, t); }), 1.0); }
  SUBCASE("spectral") { check_normal(marginal(n, 10, [&](auto t) { return spec.sample(1, t); }), 1.0); }
  SUBCASE("moving average") {
    const auto ma = make_moving_average(k, 6.0);
    MovingAverageSampler m(ma, g);
    // exact lattice variance of the truncated stencil
    double var = 0.0;
    for (int i = -20; i <= 20; ++i)
      for (int j = -20; j <= 20; ++j) {
        const double q = ma(0.5 * std::hypot(i, j)) * 0.5;
        var += q * q;
      }
    check_normal(marginal(n, 10, [&](auto t) { return m.sample(1, t); }), std::sqrt(var));
  }
  SUBCASE("local part") {
    MovingAverageSampler m(make_moving_average(k, 6.0), make_grid(2, 4.0, 0.5));
    std::vector<double> x;
    for (std::size_t t = 0; t < 2000; ++t) x.push_back(m.split(1.0, 1, t).f_L.values[10]);
    CHECK(stats::anderson_darling(x) < stats::anderson_darling_critical_5pct());
  }
}

TEST_CASE("sampled covariance equals the kernel on the dense path") {
  const Kernel k = make_cauchy(1.0, 2);
  const Grid g = make_grid(2, 4.0, 0.5);
  FieldSampler s(k, g);
  std::vector<double> m(g.size(), 0.0);
  m[g.index(2, 2)] = 1.0;
  const auto c = s.apply_covariance(m);
  CHECK(c[g.index(2, 2)] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(c[g.index(6, 2)] == doctest::Approx(k(2.0)).epsilon(1e-10));
}

TEST_CASE("empirical covariance") {
  const Kernel k = make_cauchy(1.0, 2);
  const Grid g = make_grid(2, 4.0, 0.5);
  FieldSampler s(k, g);
  std::vector<GridField> fields;
  for (std::size_t t = 0; t < 2000; ++t) fields.push_back(s.sample(3, t));
  const auto r = empirical_covariance(fields, {{0, 0, 0}, {2, 0, 0}, {4, 0, 0}});
  CHECK(std::abs(r[0].mean - 1.0) < 3 * r[0].se);
  CHECK(std::abs(r[1].mean - k(1.0)) < 3 * r[1].se);
  CHECK(std::abs(r[2].mean - k(2.0)) < 3 * r[2].se);
  // diagonal lag (1, 1) * sqrt(3)/sqrt(2) is not on the lattice; use (2, 2) h = sqrt(2)
  const auto d = empirical_covariance(fields, {{2, 2, 0}});
  CHECK(std::abs(d[0].mean - k(std::sqrt(2.0))) < 3 * d[0].se);

  std::vector<GridField> few(fields.begin(), fields.begin() + 50);
  CHECK_THROWS_AS(empirical_covariance(few, {{0, 0, 0}}), DomainError);
  std::vector<GridField> mixed(fields.begin(), fields.begin() + 150);
  mixed.push_back(sample_field(k, make_grid(2, 3.0, 0.5), 1));
  CHECK_THROWS_AS(empirical_covariance(mixed, {{0, 0, 0}}), DomainError);
}

TEST_CASE("white noise has no lagged covariance") {
  const Grid g = make_grid(2, 7.0, 1.0);
  std::vector<GridField> fields;
  for (std::uint64_t t = 0; t < 500; ++t) {
    GridField f;
    f.grid = g;
    f.values = normals(11, t, g.size());
    fields.push_back(f);
  }
  const auto r = empirical_covariance(fields, {{1, 0, 0}, {3, 0, 0}});
  for (const auto& x : r) CHECK(std::abs(x.mean) < 3 * x.se);
}

TEST_CASE("moving average covariance matches the lattice convolution") {
  const Kernel k = make_cauchy(1.0, 2);
  const auto ma = make_moving_average(k, 6.0);
  const double h = 0.5;
  const Grid g = make_grid(2, 8.0, h);
  MovingAverageSampler s(ma, g);
  // exact covariance of sum_k s(k) W(x - k) with s(k) = q(h|k|) h
  auto oracle = [&](int lag) {
    double c = 0.0;
    for (int i = -14; i <= 14; ++i)
      for (int j = -14; j <= 14; ++j)
        c += ma(h * std::hypot(i, j)) * h * ma(h * std::hypot(i + lag, j)) * h;
    return c;
  };
  std::vector<Lag> lags{{0, 0, 0}, {2, 0, 0}, {4, 0, 0}, {8, 0, 0}};
  CovarianceAccumulator acc(g, lags);
  for (std::size_t t = 0; t < 2000; ++t) acc.add(s.sample(5, t));
  const auto r = acc.result();
  for (std::size_t i = 0; i < lags.size(); ++i) {
    const double want = oracle(static_cast<int>(lags[i][0]));
    CHECK(std::abs(r[i].mean - want) < 3 * r[i].se);
  }
  // truncated root still reproduces the kernel closely
  CHECK(oracle(0) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("moving average is linear in the root") {
  const auto ma = make_moving_average(make_cauchy(1.0, 2), 4.0);
  const Grid g = make_grid(2, 4.0, 0.5);
  const auto a = sample_moving_average(ma, g, 8);
  const auto b = sample_moving_average(ma.scaled(2.5), g, 8);
  for (std::size_t i = 0; i < a.values.size(); ++i)
    CHECK(b.values[i] == doctest::Approx(2.5 * a.values[i]).epsilon(1e-12));
}

TEST_CASE("narrow roots give independent distant values") {
  // root supported in B(1): values 4 apart share no noise
  MovingAverageKernel bump(2, [](double r) { return r < 1.0 ? 1.0 - r : 0.0; }, 1.0, 1.0, 1.0,
                           "bump");
  const Grid g = make_grid(2, 8.0, 0.5);
  MovingAverageSampler s(bump, g);
  CovarianceAccumulator acc(g, {{8, 0, 0}});
  for (std::size_t t = 0; t < 500; ++t) acc.add(s.sample(2, t));
  const auto r = acc.result();
  CHECK(std::abs(r[0].mean) < 3 * r[0].se);
}

TEST_CASE("local-global split") {
  const auto ma = make_moving_average(make_cauchy(0.5, 2), 16.0);
  const Grid g = make_grid(2, 8.0, 0.5);
  MovingAverageSampler s(ma, g);
  const auto sp = s.split(4.0, 3, 0);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(sp.f_L.values[i] + sp.g_L.values[i] == sp.f.values[i]);
  CHECK(sp.f.values == s.sample(3, 0).values);
  const auto pr = local_global_split(ma, 4.0, g, 3);
  CHECK(pr.first.values == sp.f_L.values);
  CHECK(pr.first.provenance.L == 4.0);
  CHECK_THROWS_AS(s.split(0.5, 3, 0), DomainError);
  CHECK_THROWS_AS(s.split(5.0, 3, 0), DomainError);
}

TEST_CASE("local part is range dependent") {
  const auto ma = make_moving_average(make_cauchy(0.5, 2), 8.0);
  const double L = 2.0;
  const Grid g = make_grid(2, 6.0, 0.5);
  MovingAverageSampler s(ma, g);
  // stencil of f_L lives in B(L/2), so lags >= L decorrelate exactly
  CovarianceAccumulator acc(g, {{4, 0, 0}, {6, 0, 0}});
  for (std::size_t t = 0; t < 1000; ++t) acc.add(s.split(L, 4, t).f_L);
  for (const auto& x : acc.result()) CHECK(std::abs(x.mean) < 3 * x.se);
}

TEST_CASE("cutoff function") {
  CHECK(cutoff_phi(0.0) == 1.0);
  CHECK(cutoff_phi(0.25) == 1.0);
  CHECK(cutoff_phi(0.5) == 0.0);
  CHECK(cutoff_phi(3.0) == 0.0);
  double prev = 1.0;
  for (double x = 0.25; x <= 0.5; x += 0.01) {
    CHECK(cutoff_phi(x) <= prev);
    prev = cutoff_phi(x);
  }
}

TEST_CASE("cameron-martin tilt") {
  const Kernel k = make_cauchy(0.5, 2);
  const Grid g = make_grid(2, 4.0, 0.5);
  FieldSampler s(k, g);
  DiscretizedDomain d;
  d.cell_dim = 2;
  d.cells = {{g.coord(g.index(2, 4)), 0.25}, {g.coord(g.index(3, 4)), 0.25}};
  d.cell_size = 0.5;
  const auto cap = capacity(d, k);
  const std::vector<std::size_t> pts{g.index(2, 4), g.index(3, 4)};

  SUBCASE("amplitude zero") {
    const auto spec = make_shift(cap, pts, 0.0, -1, "test");
    const auto t = cameron_martin_tilt(s, spec, 7, 3);
    CHECK(t.log_weight == 0.0);
    CHECK(t.field.values == s.sample(7, 3).values);
  }
  SUBCASE("weights have unit mean") {
    const auto spec = make_shift(cap, pts, 1.0, -1, "test");
    const auto m = tilt_weight_mean(s, spec, 10000, 5);
    CHECK(std::abs(m.mean - 1.0) < 3 * m.se);
  }
  SUBCASE("norm equals amplitude squared times capacity") {
    const auto spec = make_shift(cap, pts, 0.7, -1, "test");
    Tilt tilt(s, spec);
    double q = 0.0;
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j)
        q += cap.weights[i] * cap.weights[j] * k(0.5 * std::abs(double(i) - double(j)));
    CHECK(tilt.norm2() == doctest::Approx(0.49 * cap.capacity * cap.capacity * q).epsilon(1e-10));
    // shifted field is lowered at the shift points
    CHECK(tilt.shift()[pts[0]] < 0.0);
  }
  SUBCASE("rejections") {
    auto bad = cap;
    bad.converged = false;
    CHECK_THROWS_AS(make_shift(bad, pts, 1.0, -1, ""), DomainError);
    CHECK_THROWS_AS(make_shift(cap, pts, -1.0, -1, ""), DomainError);
  }
}
