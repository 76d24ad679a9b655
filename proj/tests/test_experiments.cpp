#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "gaussperc/config.hpp"
#include "gaussperc/errors.hpp"
#include "gaussperc/experiments.hpp"
#include "gaussperc/report.hpp"

using namespace gaussperc;
namespace fs = std::filesystem;

namespace {

// -log p = b + C x^beta plus N(0, sy^2) noise
std::vector<RatePoint> synthetic(RateModel m, double b, double C, double beta, double sy,
                                 std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> z;
  std::vector<RatePoint> pts;
  for (double R : {8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0}) {
    const double y = b + C * std::pow(rate_feature(m, R), beta);
    const double p = std::exp(-(y + sy * z(eng)));
    pts.push_back({R, p, sy * p});
  }
  return pts;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path temp_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("gaussperc_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("power fit recovers synthetic exponent") {
  const auto pts = synthetic(RateModel::Power, 0.0, 2.0, 0.5, 0.1, 1);
  const auto f = fit_decay_rate(pts, RateModel::Power);
  CHECK(std::abs(f.exponent - 0.5) < 0.05);
  CHECK(f.R_used.front() == 16.0);
  CHECK(f.dof == f.R_used.size() - 2);
}

TEST_CASE("fits recover parameters within two standard errors") {
  for (auto m : {RateModel::Power, RateModel::PowerOverLog, RateModel::LogPower}) {
    const double beta = m == RateModel::LogPower ? 1.5 : 0.6;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto f = fit_decay_rate(synthetic(m, 0.0, 0.8, beta, 0.05, seed), m);
      CHECK(std::abs(f.exponent - beta) < 2 * f.exponent_se + 1e-12);
      CHECK(std::abs(f.constant - 0.8) < 2 * f.constant_se + 1e-12);
    }
  }
}

TEST_CASE("offset fit recovers the offset model") {
  FitOptions o;
  o.offset = true;
  const auto exact = synthetic(RateModel::Power, 1.5, 0.2, 0.5, 0.0, 1);
  std::vector<RatePoint> pts;
  for (auto p : exact) {
    p.se = 0.01 * p.p_hat;
    pts.push_back(p);
  }
  const auto f = fit_decay_rate(pts, RateModel::Power, o);
  CHECK(f.exponent == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(f.offset_value == doctest::Approx(1.5).epsilon(1e-6));
  CHECK(f.constant == doctest::Approx(0.2).epsilon(1e-6));
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto g = fit_decay_rate(synthetic(RateModel::Power, 1.5, 0.2, 0.5, 0.03, seed),
                                  RateModel::Power, o);
    CHECK(std::abs(g.exponent - 0.5) < 2 * g.exponent_se);
  }
}

TEST_CASE("fits reject thin data") {
  std::vector<RatePoint> pts{{16, 0.1, 0.01}, {32, 0.05, 0.005}, {64, 0.0, 0.0}, {128, 0.01, 0.009}};
  CHECK_THROWS_AS(fit_decay_rate(pts, RateModel::Power), DomainError);
  CHECK_THROWS(rate_model_from_string("exp"));
}

TEST_CASE("diameter scale") {
  CHECK(diameter_scale(0.5, 64.0) == doctest::Approx(std::pow(std::log(64.0), 2.0)));
  CHECK(diameter_scale(1.0, 64.0) == doctest::Approx(std::log(64.0) * std::log(std::log(64.0))));
  CHECK(diameter_scale(1.5, 64.0) == doctest::Approx(std::log(64.0)));
}

TEST_CASE("diameter experiment") {
  const Kernel k = make_cauchy(0.5, 2);
  const auto deep = diameter_experiment(k, 0.5, {4.0, 8.0}, {-20.0}, 20, 1);
  for (const auto& r : deep) CHECK(r.median == 0.0);
  const auto rows = diameter_experiment(k, 0.5, {4.0, 8.0, 16.0}, {-0.5}, 40, 2);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].median >= rows[i - 1].median);
  CHECK(rows[0].limit == doctest::Approx(std::pow(4.0 / (c_alpha(0.5) * 0.25), 2.0)));
  CHECK_THROWS_AS(diameter_experiment(k, 0.5, {4.0}, {0.5}, 10, 1), DomainError);
}

TEST_CASE("config parsing") {
  const auto c = parse_config(R"(
[experiment]
kind = percolate
seed = 5
[kernel]
family = cauchy
alpha = 1
[event]
kind = cross
levels = -0.5, -0.25 0
radii = 4 8
[sampling]
h = 0.5
trials = 100
)");
  CHECK(c.kind == "percolate");
  CHECK(c.seed == 5);
  CHECK(c.kernel.alpha == 1.0);
  CHECK(c.event == EventKind::Cross);
  CHECK(c.levels == std::vector<double>{-0.5, -0.25, 0.0});
  CHECK(c.radii == std::vector<double>{4.0, 8.0});
  CHECK(c.h == 0.5);
  CHECK_THROWS_AS(parse_config("[kernel]\ncolour = red\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[extras]\na = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[sampling]\nh = fast\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[event]\nradii = 8 4\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[experiment]\nkind = dance\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.ini"), ConfigError);
}

TEST_CASE("tables") {
  Table t;
  t.header = estimate_header();
  CHECK(to_csv(t) == "kernel,alpha,gamma,event,level,R,method,trials,ess,p_hat,se,ci_lo,ci_hi,seed\n");
  Table u;
  u.header = {"a", "b", "c"};
  u.add({1.0 / 3.0, "x,y", std::nan("")});
  CHECK(to_csv(u) == "a,b,c\n0.33333333333333331,\"x,y\",nan\n");
  const auto back = table_from_json(json::parse(to_json(u).dump()));
  CHECK(back.header == u.header);
  CHECK(back.rows[0][0].get<double>() == 1.0 / 3.0);
  CHECK(back.rows[0][1] == "x,y");
  CHECK(back.rows[0][2] == "nan");
  CHECK(to_json(table_from_json(to_json(u))) == to_json(u));
  CHECK_THROWS(u.add({1}));
  CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("runs are byte-identical") {
  auto c = parse_config(R"(
[kernel]
alpha = 0.5
[event]
kind = arm
levels = -0.5 -1
radii = 2 4
[sampling]
h = 0.5
trials = 200
)");
  const auto a = temp_dir("a"), b = temp_dir("b");
  const auto sa = run_config(c, "percolate", a.string());
  const auto sb = run_config(c, "percolate", b.string());
  CHECK(sa.exit_code == 0);
  CHECK(sb.exit_code == 0);
  REQUIRE(fs::exists(a / "estimates.csv"));
  CHECK(slurp(a / "estimates.csv") == slurp(b / "estimates.csv"));
  CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
  const auto text = slurp(a / "estimates.csv");
  CHECK(text.rfind("kernel,alpha,gamma,event,level,R,method,trials,ess,p_hat,se,ci_lo,ci_hi,seed\n", 0) == 0);

  c.kind = "diameter";
  CHECK_THROWS_AS(run_config(c, "percolate", a.string()), ConfigError);
}

TEST_CASE("capacity table run") {
  auto c = parse_config(R"(
[kernel]
family = riesz
[capacity]
domain = segment
n = 128
alphas = 0.3 0.5
)");
  const auto d = temp_dir("cap");
  const auto st = run_config(c, "capacity", d.string());
  CHECK(st.exit_code == 0);
  CHECK(fs::exists(d / "capacity.csv"));
  CHECK(fs::exists(d / "measure_alpha_0.5.csv"));
  const auto s = json::parse(slurp(d / "summary.json"));
  REQUIRE(s["records"].size() == 2);
  for (const char* key : {"capacity", "gap", "iterations", "n", "measure_csv_path"})
    CHECK(s["records"][0].contains(key));
}

TEST_CASE("sample run writes binary and sidecar") {
  auto c = parse_config(R"(
[experiment]
kind = sample
[sampling]
h = 0.5
window = 2
)");
  const auto d = temp_dir("sample");
  const auto st = run_config(c, "sample", d.string());
  CHECK(st.exit_code == 0);
  std::ifstream in(d / "field.bin", std::ios::binary);
  std::string head;
  std::getline(in, head);
  const auto h = json::parse(head);
  CHECK(h["dims"] == json::array({9, 9}));
  std::vector<char> rest((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(rest.size() == 81 * 8);
  CHECK(fs::exists(d / "field.meta.json"));
}

TEST_CASE("failed jobs are recorded per row") {
  auto c = parse_config(R"(
[event]
kind = arm
radii = 4 8 16 32
levels = -1
[sampling]
h = 0.5
trials = 100
[fit]
model = power
)");
  const auto d = temp_dir("rates");
  const auto st = run_config(c, "rates", d.string());
  // too few usable points for a fit; estimates still written
  CHECK(st.failures >= 1);
  CHECK(st.exit_code == 0);
  CHECK(slurp(d / "fit.csv").find("usable points") != std::string::npos);
}
