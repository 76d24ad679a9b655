#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "gaussperc/capacity.hpp"
#include "gaussperc/errors.hpp"

using namespace gaussperc;
using std::numbers::pi;

namespace {

double c_alpha_oracle(double a) {
  return std::beta((1 + a) / 2, (1 + a) / 2) * std::cos(pi * a / 2) / pi;
}

}  // namespace

TEST_CASE("c_alpha closed form") {
  CHECK(c_alpha(0.0) == 1.0);
  CHECK(std::abs(c_alpha(0.5) - c_alpha_oracle(0.5)) < 1e-12);
  CHECK(std::abs(c_alpha(0.5) - 0.38137988175090659) < 1e-12);
  double prev = c_alpha(0.0);
  for (int i = 1; i <= 20; ++i) {
    const double a = 0.05 * i - 1e-9;
    const double v = c_alpha(a);
    CHECK(v < prev);
    CHECK(v > 0.0);
    prev = v;
  }
  CHECK(prev < 1e-6);
  CHECK_THROWS_AS(c_alpha(1.0), DomainError);
  CHECK_THROWS_AS(c_alpha(-0.1), DomainError);
}

TEST_CASE("riesz equilibrium density") {
  const double v = riesz_equilibrium_density(0.5, 0.5);
  CHECK(v == doctest::Approx(std::pow(0.25, -0.25) / std::beta(0.75, 0.75)).epsilon(1e-13));
  CHECK(v == doctest::Approx(0.8346).epsilon(1e-4));
  for (double x : {0.1, 0.27, 0.4}) {
    CHECK(riesz_equilibrium_density(0.3, x) == doctest::Approx(riesz_equilibrium_density(0.3, 1 - x)));
    CHECK(riesz_equilibrium_density(0.999999, x) == doctest::Approx(1.0).epsilon(1e-4));
  }
  CHECK(std::isinf(riesz_equilibrium_density(0.5, 0.0)));
  CHECK(std::isinf(riesz_equilibrium_density(0.5, 1.0)));
  CHECK(riesz_equilibrium_cdf(0.5, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("energy of the uniform measure under riesz") {
  const auto d = segment_domain(1.0, 512);
  const auto m = uniform_measure(d);
  // continuum value 2 / ((1 - a)(2 - a)) at a = 0.5
  CHECK(energy(m, make_riesz(0.5, 2)) == doctest::Approx(8.0 / 3.0).epsilon(0.01));
}

TEST_CASE("energy of small configurations") {
  const Kernel k = make_cauchy(1.0, 2);
  DiscretizedDomain one;
  one.cells.push_back({{0.0, 0.0, 0.0}, 1e-4});
  one.cell_size = 2e-4;
  DiscreteMeasure m1{{1.0}, &one};
  CHECK(energy(m1, k) == doctest::Approx(1.0).epsilon(1e-6));

  DiscretizedDomain two;
  two.cells.push_back({{0.0, 0.0, 0.0}, 1e-4});
  two.cells.push_back({{10.0, 0.0, 0.0}, 1e-4});
  two.cell_size = 2e-4;
  DiscreteMeasure m2{{0.5, 0.5}, &two};
  const double expect = 0.25 * 2.0 + 0.5 / std::sqrt(101.0);
  CHECK(energy(m2, k) == doctest::Approx(expect).epsilon(1e-6));
  CHECK(expect == doctest::Approx(0.5497).epsilon(1e-4));
}

TEST_CASE("capacity of riesz segment approaches c_alpha") {
  for (double a : {0.3, 0.5, 0.7}) {
    const auto d = segment_domain(1.0, 512);
    const auto r = capacity(d, make_riesz(a, 2));
    CHECK(r.converged);
    CHECK(r.duality_gap <= 1e-6);
    CHECK(std::abs(r.capacity / c_alpha_oracle(a) - 1.0) < 0.02);
    CHECK(std::abs(r.capacity * r.energy - 1.0) < 1e-12);
    const double s = std::accumulate(r.weights.begin(), r.weights.end(), 0.0);
    CHECK(std::abs(s - 1.0) <= 1e-12);
    CHECK(*std::min_element(r.weights.begin(), r.weights.end()) >= 0.0);
    // primal/dual bracket
    CHECK(r.capacity <= r.capacity_upper * (1 + 1e-12));
    CHECK(r.capacity_upper <= r.capacity * (1 + 1e-5));
    CHECK(ks_distance_to_beta(r, d, a) <= 0.02);
  }
}

TEST_CASE("capacity of a small ball is about 1/K(0)") {
  const auto d = ball_domain({0.0, 0.0, 0.0}, 0.05, 0.02);
  const auto r = capacity(d, make_cauchy(0.5, 2));
  CHECK(r.capacity == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("capacity is monotone in the domain") {
  const Kernel k = make_cauchy(0.5, 2);
  const auto a = capacity(segment_domain_max_cell(4.0, 0.25), k);
  const auto b = capacity(segment_domain_max_cell(8.0, 0.25), k);
  CHECK(a.capacity <= b.capacity * (1 + 1e-9));
  const auto s = capacity(condensed_segment(2.0, 2.0, 8.0, 0.25), k);
  CHECK(s.capacity <= b.capacity * (1 + 1e-9));
}

TEST_CASE("dual potential") {
  const Kernel k = make_cauchy(0.5, 2);
  const auto d = segment_domain_max_cell(8.0, 0.25);
  const auto r = capacity(d, k, {1e-8});
  std::vector<Point> sup, far{{1e6, 0.0, 0.0}};
  for (std::size_t i = 0; i < d.size(); ++i)
    if (r.weights[i] > 1e-6) sup.push_back(d.cells[i].center);
  for (double v : dual_potential(r, d, k, sup)) CHECK(std::abs(v - 1.0) <= 1e-6);
  const double hf = dual_potential(r, d, k, far)[0];
  CHECK(hf == doctest::Approx(r.capacity * k(1e6)).epsilon(1e-3));
  CHECK(hf < 0.01);
  // |h|_H^2 = Cap^2 E(mu) = Cap
  CHECK(r.capacity * r.capacity * r.energy == doctest::Approx(r.capacity).epsilon(1e-12));
}

TEST_CASE("capacity asymptote formulas") {
  const double R = 100.0;
  CHECK(capacity_asymptote(make_cauchy(0.5, 2), R) ==
        doctest::Approx(c_alpha_oracle(0.5) * std::pow(1 + R * R, 0.25)).epsilon(1e-10));
  CHECK(capacity_asymptote(make_cauchy(1.0, 2), R) ==
        doctest::Approx(R / (2 * std::asinh(R))).epsilon(1e-10));
  CHECK(capacity_asymptote(make_cauchy(1.0, 2), R) == doctest::Approx(9.437).epsilon(1e-3));
  const Kernel k15 = make_cauchy(1.5, 2);
  // int_0^inf (1+x^2)^{-3/4} dx = sqrt(pi) Gamma(1/4) / (2 Gamma(3/4))
  const double I = std::sqrt(pi) * std::tgamma(0.25) / (2 * std::tgamma(0.75));
  CHECK(capacity_asymptote(k15, 50.0) == doctest::Approx(50.0 / (2 * I)).epsilon(1e-8));
  CHECK(capacity_asymptote(k15, 100.0) == doctest::Approx(2 * capacity_asymptote(k15, 50.0)));
}

TEST_CASE("condensed segment geometry") {
  const auto d = condensed_segment(1.0, 2.0, 10.0, 0.25);
  std::vector<double> starts;
  double prev = -1e9;
  for (const auto& c : d.cells) {
    const double lo = c.center[0] - c.half;
    if (lo > prev + 1e-9) starts.push_back(lo);
    prev = c.center[0] + c.half;
  }
  REQUIRE(starts.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(starts[i] == doctest::Approx(2.0 * (i + 1)));
  CHECK_THROWS_AS(condensed_segment(3.0, 2.0, 10.0), DomainError);
  CHECK_THROWS_AS(condensed_segment(1.0, 20.0, 10.0), DomainError);
}

TEST_CASE("projection of a single ball") {
  const auto p = projection_compare(make_cauchy(0.5, 2), 0.75, {{2.0, 0.0, 0.0}}, 2.0, 0.25);
  CHECK(std::abs(p.cap_balls - p.cap_condensed) <= 1e-9 * p.cap_balls);
  CHECK(p.ratio == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("projection rejects crowded centres") {
  CHECK_THROWS_AS(projection_compare(make_cauchy(0.5, 2), 1.0,
                                     {{4.0, 0.0, 0.0}, {5.0, 0.0, 0.0}}, 4.0, 0.25),
                  DomainError);
}

TEST_CASE("refinement convergence") {
  const Kernel k = make_riesz(0.5, 2);
  const double c1 = capacity(segment_domain(1.0, 64), k).capacity;
  const double c2 = capacity(segment_domain(1.0, 128), k).capacity;
  const double c4 = capacity(segment_domain(1.0, 256), k).capacity;
  CHECK(std::abs(c4 - c2) < std::abs(c2 - c1));
}

TEST_CASE("solver errors") {
  DiscretizedDomain one;
  one.cells.push_back({{0.0, 0.0, 0.0}, 0.0});
  DiscreteMeasure m{{1.0}, &one};
  CHECK_THROWS_AS(energy(m, make_riesz(0.5, 2)), SingularityError);
}
