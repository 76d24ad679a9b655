#include "gaussperc/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <cstring>
#include <sstream>

#include <Eigen/Dense>

#include "gaussperc/errors.hpp"
#include "gaussperc/sampler.hpp"

namespace gaussperc {

std::string to_string(RateModel m) {
  switch (m) {
    case RateModel::Power: return "power";
    case RateModel::PowerOverLog: return "power_over_log";
    case RateModel::LogPower: return "log_power";
  }
  return "?";
}

RateModel rate_model_from_string(const std::string& s) {
  if (s == "power") return RateModel::Power;
  if (s == "power_over_log") return RateModel::PowerOverLog;
  if (s == "log_power") return RateModel::LogPower;
  throw ConfigError("unknown rate model '" + s + "'");
}

double rate_feature(RateModel m, double R) {
  if (!(R > 1.0)) throw DomainError("rate models need R > 1");
  switch (m) {
    case RateModel::Power: return R;
    case RateModel::PowerOverLog: return R / std::log(R);
    case RateModel::LogPower: return std::log(R);
  }
  return R;
}

RateFit fit_decay_rate(const std::vector<RatePoint>& pts, RateModel model,
                       const FitOptions& opts) {
  std::vector<RatePoint> use;
  for (const auto& p : pts)
    if (p.p_hat > 0.0 && p.p_hat < 1.0 && p.se > 0.0 && p.se / p.p_hat <= opts.max_rel_se)
      use.push_back(p);
  std::sort(use.begin(), use.end(), [](const RatePoint& a, const RatePoint& b) { return a.R < b.R; });
  if (opts.exclude_smallest && !pts.empty()) {
    const double rmin =
        std::min_element(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.R < b.R; })->R;
    std::erase_if(use, [rmin](const RatePoint& p) { return p.R == rmin; });
  }
  const std::size_t npar = opts.offset ? 3 : 2;
  if (use.size() < std::max(opts.min_points, npar)) {
    std::ostringstream msg;
    msg << "rate fit needs " << std::max(opts.min_points, npar) << " usable points, have "
        << use.size();
    throw DomainError(msg.str());
  }
  const std::size_t n = use.size();
  Eigen::VectorXd x(n), y(n), sy(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = rate_feature(model, use[i].R);
    y[i] = -std::log(use[i].p_hat);
    sy[i] = use[i].se / use[i].p_hat;
    if (!(y[i] > 0.0)) throw DomainError("rate fit needs p_hat < 1");
  }

  RateFit fit;
  fit.model = model;
  fit.offset = opts.offset;
  for (const auto& p : use) fit.R_used.push_back(p.R);

  // log y = log C + beta log x, weights 1 / sd(log y)^2 = (y / sd(y))^2
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd ly(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = std::log(x[i]);
    ly[i] = std::log(y[i]);
    w[i] = (y[i] / sy[i]) * (y[i] / sy[i]);
  }
  Eigen::MatrixXd XtWX = X.transpose() * w.asDiagonal() * X;
  Eigen::VectorXd beta = XtWX.ldlt().solve(X.transpose() * w.asDiagonal() * ly);
  double logC = beta[0];
  double b = beta[1];
  Eigen::MatrixXd cov = XtWX.inverse();
  fit.exponent = b;
  fit.exponent_se = std::sqrt(cov(1, 1));
  fit.constant = std::exp(logC);
  fit.constant_se = fit.constant * std::sqrt(cov(0, 0));

  if (opts.offset) {
    // Levenberg-Marquardt on (offset, C, beta) in y-space
    Eigen::Vector3d p(0.0, fit.constant, fit.exponent);
    auto resid = [&](const Eigen::Vector3d& q) {
      Eigen::VectorXd r(n);
      for (std::size_t i = 0; i < n; ++i) r[i] = (y[i] - q[0] - q[1] * std::pow(x[i], q[2])) / sy[i];
      return r;
    };
    auto jac = [&](const Eigen::Vector3d& q) {
      Eigen::MatrixXd J(n, 3);
      for (std::size_t i = 0; i < n; ++i) {
        const double xb = std::pow(x[i], q[2]);
        J(i, 0) = 1.0 / sy[i];
        J(i, 1) = xb / sy[i];
        J(i, 2) = q[1] * xb * std::log(x[i]) / sy[i];
      }
      return J;
    };
    double lambda = 1e-3;
    double cost = resid(p).squaredNorm();
    for (int it = 0; it < 500; ++it) {
      const Eigen::VectorXd r = resid(p);
      const Eigen::MatrixXd J = jac(p);
      Eigen::Matrix3d A = J.transpose() * J;
      const Eigen::Vector3d g = J.transpose() * r;
      Eigen::Matrix3d Ad = A;
      for (int k = 0; k < 3; ++k) Ad(k, k) += lambda * std::max(A(k, k), 1e-300);
      const Eigen::Vector3d step = Ad.ldlt().solve(g);
      const Eigen::Vector3d trial = p + step;
      const double tc = resid(trial).squaredNorm();
      if (std::isfinite(tc) && tc < cost) {
        const double rel = (cost - tc) / std::max(cost, 1e-300);
        p = trial;
        cost = tc;
        lambda = std::max(lambda / 3.0, 1e-12);
        if (rel < 1e-14 || step.norm() < 1e-14 * (1.0 + p.norm())) break;
      } else {
        lambda *= 4.0;
        if (lambda > 1e12) break;
      }
    }
    const Eigen::MatrixXd J = jac(p);
    const Eigen::Matrix3d C3 = (J.transpose() * J).inverse();
    fit.offset_value = p[0];
    fit.offset_se = std::sqrt(C3(0, 0));
    fit.constant = p[1];
    fit.constant_se = std::sqrt(C3(1, 1));
    fit.exponent = p[2];
    fit.exponent_se = std::sqrt(C3(2, 2));
  }

  for (std::size_t i = 0; i < n; ++i) {
    const double m = fit.offset_value + fit.constant * std::pow(x[i], fit.exponent);
    fit.residuals.push_back((y[i] - m) / sy[i]);
    fit.chi2 += fit.residuals.back() * fit.residuals.back();
  }
  fit.dof = n - npar;
  return fit;
}

double diameter_scale(double alpha, double R) {
  const double L = std::log(R);
  if (alpha > 0.0 && alpha < 1.0) return std::pow(L, 1.0 / alpha);
  if (alpha == 1.0) return L * std::log(L);
  return L;
}

namespace {

double quantile_sorted(const std::vector<double>& v, double q) {
  // linear interpolation between order statistics
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

std::vector<DiameterRow> diameter_experiment(const Kernel& k, double h,
                                             const std::vector<double>& radii,
                                             const std::vector<double>& levels,
                                             std::size_t trials, std::uint64_t seed,
                                             const McOptions& opts) {
  if (radii.empty() || levels.empty()) throw DomainError("diameter experiment needs radii and levels");
  if (trials < 1) throw DomainError("diameter experiment needs trials");
  for (double l : levels)
    if (!(l < 0.0)) throw DomainError("diameter levels must be negative");
  const double Rmax = *std::max_element(radii.begin(), radii.end());
  EventSpec e;
  e.kind = EventKind::Arm;
  e.R = Rmax;
  const Grid g = event_window(e, k.dim(), h);
  FieldSampler s(k, g, opts.sampler);
  std::vector<std::vector<std::uint8_t>> balls;
  for (double R : radii) {
    std::vector<std::uint8_t> m(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Point x = g.coord(i);
      m[i] = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) <= R + 1e-9 * h ? 1 : 0;
    }
    balls.push_back(std::move(m));
  }
  // d[r][l][t]
  std::vector<std::vector<std::vector<double>>> d(
      radii.size(), std::vector<std::vector<double>>(levels.size(), std::vector<double>(trials)));
  auto one = [&](std::size_t t, const GridField& f) {
    for (std::size_t r = 0; r < radii.size(); ++r)
      for (std::size_t l = 0; l < levels.size(); ++l)
        d[r][l][t] = largest_diameter(excursion_components(f, levels[l], &balls[r]));
  };
  for (std::size_t p = 0; 2 * p < trials; ++p) {
    if (s.dense()) {
      for (std::size_t t = 2 * p; t < std::min(2 * p + 2, trials); ++t) one(t, s.sample(seed, t));
    } else {
      auto pr = s.sample_pair(seed, p);
      one(2 * p, pr.first);
      if (2 * p + 1 < trials) one(2 * p + 1, pr.second);
    }
  }
  const double a = k.alpha();
  std::vector<DiameterRow> out;
  for (std::size_t r = 0; r < radii.size(); ++r)
    for (std::size_t l = 0; l < levels.size(); ++l) {
      auto v = d[r][l];
      std::sort(v.begin(), v.end());
      DiameterRow row;
      row.R = radii[r];
      row.level = levels[l];
      row.trials = trials;
      row.median = quantile_sorted(v, 0.5);
      row.q25 = quantile_sorted(v, 0.25);
      row.q75 = quantile_sorted(v, 0.75);
      row.ratio = row.median / diameter_scale(a, radii[r]);
      const double l2 = levels[l] * levels[l];
      if (a > 0.0 && a < 1.0)
        row.limit = std::pow(4.0 / (c_alpha(a) * l2), 1.0 / a);
      else if (a == 1.0)
        row.limit = 8.0 / l2;
      else
        row.limit = std::numeric_limits<double>::quiet_NaN();
      out.push_back(row);
    }
  return out;
}

namespace {

std::string default_kind(const std::string& command) {
  if (command == "capacity") return "capacity_table";
  if (command == "sample") return "sample";
  if (command == "percolate") return "percolate";
  if (command == "rates") return "decay_rate";
  if (command == "diameter") return "diameter";
  throw ConfigError("unknown command '" + command + "'");
}

bool kind_allowed(const std::string& command, const std::string& kind) {
  if (command == "sample") return kind == "sample" || kind == "covariance_validation";
  if (command == "percolate") return kind == "percolate" || kind == "correlation_length";
  return kind == default_kind(command);
}

McOptions mc_options(const ExperimentConfig& c) {
  McOptions o;
  o.threads = c.threads;
  o.sampler.padding = c.padding;
  return o;
}

std::string fmt_tag(double x) {
  std::ostringstream s;
  s << x;
  return s.str();
}

DiscretizedDomain capacity_domain(const ExperimentConfig& c) {
  if (c.domain == "segment")
    return c.cap_n > 0 ? segment_domain(c.cap_R, c.cap_n) : segment_domain_max_cell(c.cap_R, c.cell);
  if (c.domain == "box") return box_domain(c.cap_R, c.cell);
  if (c.domain == "ball") return ball_domain({0.0, 0.0, 0.0}, c.cap_R, c.cell);
  if (c.domain == "condensed") return condensed_segment(c.s, c.r, c.cap_R, c.cell);
  if (c.domain == "balls") return union_of_balls(c.s, c.centers, c.cell);
  throw ConfigError("unknown capacity domain '" + c.domain + "'");
}

Table measure_table(const DiscretizedDomain& d, const CapacityResult& r) {
  Table t;
  t.header = {"x", "y", "weight"};
  for (std::size_t i = 0; i < d.size(); ++i)
    t.add({d.cells[i].center[0], d.cells[i].center[1], r.weights[i]});
  return t;
}

void run_capacity(const ExperimentConfig& c, Report& rep, RunStatus& st) {
  CapacityOptions co;
  co.tol = c.cap_tol;
  std::vector<double> alphas = c.alphas;
  if (alphas.empty()) alphas.push_back(c.kernel.alpha);
  Table tab;
  tab.header = {"kernel", "alpha", "domain", "n", "capacity", "capacity_upper", "gap",
                "iterations", "converged", "c_alpha", "rel_err", "ks", "measure_csv_path"};
  json records = json::array();
  for (double a : alphas) {
    ++st.jobs;
    KernelSpec ks = c.kernel;
    ks.alpha = a;
    const Kernel k = make_kernel(ks);
    const auto d = capacity_domain(c);
    const auto r = capacity(d, k, co);
    const std::string mname = "measure_alpha_" + fmt_tag(a);
    rep.tables.push_back({mname, measure_table(d, r)});
    // c_alpha and the Beta law are the targets for Riesz on [0, 1]
    const bool riesz_unit = k.family() == KernelFamily::Riesz && c.domain == "segment" &&
                            c.cap_R == 1.0 && a > 0.0 && a < 1.0;
    const double ca = riesz_unit ? c_alpha(a) : std::numeric_limits<double>::quiet_NaN();
    const double ksd =
        riesz_unit ? ks_distance_to_beta(r, d, a) : std::numeric_limits<double>::quiet_NaN();
    tab.add({to_string(k.family()), a, c.domain, static_cast<std::uint64_t>(r.n), r.capacity,
             r.capacity_upper, r.duality_gap, static_cast<std::uint64_t>(r.iterations),
             r.converged, ca, r.capacity / ca - 1.0, ksd, mname + ".csv"});
    json j = to_json(r);
    j["alpha"] = a;
    j["measure_csv_path"] = mname + ".csv";
    records.push_back(j);
  }
  rep.tables.push_back({"capacity", tab});
  rep.summary["records"] = records;
}

void write_field(const GridField& f, const std::string& dir, const std::string& name,
                 std::vector<std::string>& files) {
  json head;
  std::vector<std::size_t> dims;
  for (int a = f.grid.dim - 1; a >= 0; --a) dims.push_back(f.grid.n[a]);
  head["dims"] = dims;
  head["h"] = f.grid.h;
  head["origin"] = std::vector<double>(f.grid.origin.begin(), f.grid.origin.begin() + f.grid.dim);
  head["seed"] = f.seed;
  head["trial"] = f.trial;
  head["dtype"] = "float64-le";
  const std::string bin = dir + "/" + name + ".bin";
  std::ofstream out(bin, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + bin + "'");
  out << head.dump() << "\n";
  for (double v : f.values) {
    unsigned char b[8];
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
  }
  if (!out) throw std::runtime_error("write failed for '" + bin + "'");
  files.push_back(bin);
  json meta = head;
  meta["method"] = f.provenance.method;
  meta["kernel"] = f.provenance.kernel_id;
  meta["L"] = f.provenance.L;
  meta["part"] = f.provenance.part;
  meta["clipped_mass"] = f.provenance.clipped_mass;
  meta["torus"] = f.provenance.torus;
  meta["warnings"] = f.provenance.warnings;
  const std::string mp = dir + "/" + name + ".meta.json";
  write_text(mp, meta.dump(2) + "\n");
  files.push_back(mp);
}

void run_sample(const ExperimentConfig& c, const std::string& dir, Report& rep, RunStatus& st) {
  ++st.jobs;
  const Kernel k = make_kernel(c.kernel);
  const Grid g = centered_grid(k.dim(), std::round(c.window / c.h) * c.h, c.h);
  SamplerOptions so;
  so.padding = c.padding;
  const auto f = sample_field(k, g, c.seed, so);
  std::filesystem::create_directories(dir);
  write_field(f, dir, "field", st.files);
  rep.summary["field"] = "field.bin";
}

void run_covariance(const ExperimentConfig& c, Report& rep, RunStatus& st) {
  ++st.jobs;
  const Kernel k = make_kernel(c.kernel);
  const Grid g = make_grid(k.dim(), std::round(c.window / c.h) * c.h, c.h);
  std::vector<Lag> lags;
  for (double l : c.lags) {
    const double steps = l / c.h;
    if (std::abs(steps - std::round(steps)) > 1e-9) throw ConfigError("lags must be multiples of h");
    lags.push_back({static_cast<long>(std::llround(steps)), 0, 0});
  }
  SamplerOptions so;
  so.padding = c.padding;
  FieldSampler s(k, g, so);
  CovarianceAccumulator acc(g, lags);
  for (std::size_t t = 0; t < c.trials; ++t) acc.add(s.sample(c.seed, t));
  const auto res = acc.result();
  Table t;
  t.header = {"lag", "K_true", "K_emp", "se", "z"};
  std::size_t bad = 0;
  for (std::size_t i = 0; i < lags.size(); ++i) {
    const double kt = k(c.lags[i]);
    const double z = (res[i].mean - kt) / res[i].se;
    bad += std::abs(z) > 3.0 ? 1 : 0;
    t.add({c.lags[i], kt, res[i].mean, res[i].se, z});
  }
  rep.tables.push_back({"covariance", t});
  rep.summary["max_abs_z_exceeding_3"] = bad;
  rep.summary["clipped_mass"] = s.clipped_mass();
  rep.summary["warnings"] = s.warnings();
}

struct ErrorLog {
  Table t{{"R", "level", "error"}, {}};
  bool resource = false;
  void add(double R, double level, const std::exception& e) {
    t.add({R, level, e.what()});
    if (dynamic_cast<const ResourceError*>(&e)) resource = true;
  }
};

IsOptions is_options(const ExperimentConfig& c) {
  IsOptions is;
  is.level_target = c.level_target;
  is.amplitude = c.amplitude;
  is.directions = c.directions;
  is.rao_blackwell = c.method == "is_rb";
  return is;
}

std::vector<Estimate> estimates_for(const ExperimentConfig& c, const Kernel& k, RunStatus& st,
                                    ErrorLog& errs) {
  std::vector<Estimate> out;
  const McOptions mo = mc_options(c);
  for (double R : c.radii) {
    EventSpec e;
    e.kind = c.event;
    e.R = R;
    e.r_in = c.r_in;
    e.rho = c.rho;
    if (c.method == "naive") {
      ++st.jobs;
      try {
        const Grid g = event_window(e, k.dim(), c.h);
        for (auto& x : mc_estimate_levels(k, g, e, c.levels, c.trials, c.seed, mo)) out.push_back(x);
      } catch (const std::exception& ex) {
        ++st.failures;
        errs.add(R, std::numeric_limits<double>::quiet_NaN(), ex);
      }
      continue;
    }
    for (double l : c.levels) {
      ++st.jobs;
      try {
        e.level = l;
        const Grid g = event_window(e, k.dim(), c.h);
        out.push_back(is_estimate(k, g, e, c.trials, c.seed, is_options(c), mo));
      } catch (const std::exception& ex) {
        ++st.failures;
        errs.add(R, l, ex);
      }
    }
  }
  return out;
}

Table estimates_table(const Kernel& k, const std::vector<Estimate>& est) {
  Table t;
  t.header = estimate_header();
  for (const auto& e : est) t.add(estimate_row(k, e));
  return t;
}

json fit_json(const RateFit& f) {
  return {{"model", to_string(f.model)},     {"offset", f.offset},
          {"exponent", f.exponent},          {"exponent_se", f.exponent_se},
          {"constant", f.constant},          {"constant_se", f.constant_se},
          {"offset_value", f.offset_value},  {"offset_se", f.offset_se},
          {"R_used", f.R_used},              {"residuals", f.residuals},
          {"chi2", f.chi2},                  {"dof", f.dof}};
}

void run_percolate(const ExperimentConfig& c, Report& rep, RunStatus& st, ErrorLog& errs) {
  const Kernel k = make_kernel(c.kernel);
  const auto est = estimates_for(c, k, st, errs);
  rep.tables.push_back({"estimates", estimates_table(k, est)});
  json w = json::array();
  for (const auto& e : est)
    if (!e.warnings.empty() || !e.reliable) w.push_back(to_json(e));
  rep.summary["flagged"] = w;
}

void run_decay(const ExperimentConfig& c, Report& rep, RunStatus& st, ErrorLog& errs) {
  const Kernel k = make_kernel(c.kernel);
  const auto est = estimates_for(c, k, st, errs);
  rep.tables.push_back({"estimates", estimates_table(k, est)});
  const RateModel model = rate_model_from_string(c.fit_model);
  Table ft;
  ft.header = {"level", "model", "offset", "exponent", "exponent_se", "constant", "constant_se",
               "offset_value", "offset_se", "chi2", "dof", "points", "error"};
  json fits = json::array();
  for (double l : c.levels) {
    std::vector<RatePoint> pts;
    for (const auto& e : est)
      if (e.event.level == l) pts.push_back({e.event.R, e.p_hat, e.se});
    FitOptions fo;
    fo.offset = c.fit_offset;
    fo.max_rel_se = c.max_rel_se;
    fo.exclude_smallest = c.exclude_smallest;
    ++st.jobs;
    try {
      const auto f = fit_decay_rate(pts, model, fo);
      ft.add({l, to_string(model), f.offset, f.exponent, f.exponent_se, f.constant, f.constant_se,
              f.offset_value, f.offset_se, f.chi2, static_cast<std::uint64_t>(f.dof),
              static_cast<std::uint64_t>(f.R_used.size()), ""});
      json j = fit_json(f);
      j["level"] = l;
      fits.push_back(j);
    } catch (const std::exception& ex) {
      ++st.failures;
      const double nan = std::numeric_limits<double>::quiet_NaN();
      ft.add({l, to_string(model), c.fit_offset, nan, nan, nan, nan, nan, nan, nan,
              std::uint64_t{0}, std::uint64_t{0}, ex.what()});
    }
  }
  rep.tables.push_back({"fit", ft});
  rep.summary["fits"] = fits;
}

void run_diameter(const ExperimentConfig& c, Report& rep, RunStatus& st) {
  ++st.jobs;
  const Kernel k = make_kernel(c.kernel);
  const auto rows = diameter_experiment(k, c.h, c.radii, c.levels, c.trials, c.seed, mc_options(c));
  Table t;
  t.header = {"R", "level", "trials", "median", "q25", "q75", "ratio", "limit"};
  for (const auto& r : rows)
    t.add({r.R, r.level, static_cast<std::uint64_t>(r.trials), r.median, r.q25, r.q75, r.ratio,
           r.limit});
  rep.tables.push_back({"diameter", t});
}

void run_correlation(const ExperimentConfig& c, Report& rep, RunStatus& st) {
  ++st.jobs;
  const Kernel k = make_kernel(c.kernel);
  CorrelationLengthOptions o;
  o.eps = c.eps;
  o.h = c.h;
  o.R0 = c.R0;
  o.R_max = c.R_max;
  o.trials = c.trials;
  o.refine_steps = c.refine_steps;
  o.mc = mc_options(c);
  const auto rows = correlation_length(k, c.levels, c.seed, o);
  Table t;
  t.header = {"level", "xi", "censored", "R_lo", "R_hi", "p_hat", "ci_hi", "trials"};
  for (const auto& r : rows)
    t.add({r.level, r.xi, r.censored, r.R_lo, r.R_hi, r.at_xi.p_hat, r.at_xi.ci_hi,
           static_cast<std::uint64_t>(r.at_xi.trials)});
  rep.tables.push_back({"correlation_length", t});
}

}  // namespace

RunStatus run_config(const ExperimentConfig& cfg, const std::string& command,
                     const std::string& out_dir) {
  ExperimentConfig c = cfg;
  if (c.kind.empty()) c.kind = default_kind(command);
  if (!kind_allowed(command, c.kind))
    throw ConfigError("experiment kind '" + c.kind + "' does not belong to '" + command + "'");
  validate(c);

  RunStatus st;
  Report rep;
  ErrorLog errs;
  rep.summary["kind"] = c.kind;
  rep.summary["seed"] = c.seed;
  rep.summary["kernel"] = {{"family", c.kernel.family},
                           {"alpha", c.kernel.alpha},
                           {"gamma", c.kernel.gamma},
                           {"dim", c.kernel.dim},
                           {"join_radius", c.kernel.join_radius}};
  bool total_failure = false;
  bool resource = false;
  try {
    if (c.kind == "capacity_table") run_capacity(c, rep, st);
    else if (c.kind == "sample") run_sample(c, out_dir, rep, st);
    else if (c.kind == "covariance_validation") run_covariance(c, rep, st);
    else if (c.kind == "percolate") run_percolate(c, rep, st, errs);
    else if (c.kind == "correlation_length") run_correlation(c, rep, st);
    else if (c.kind == "decay_rate") run_decay(c, rep, st, errs);
    else if (c.kind == "diameter") run_diameter(c, rep, st);
  } catch (const ConfigError&) {
    throw;
  } catch (const ResourceError& e) {
    total_failure = true;
    resource = true;
    rep.summary["error"] = e.what();
  } catch (const std::exception& e) {
    total_failure = true;
    rep.summary["error"] = e.what();
  }
  if (!errs.t.rows.empty()) rep.tables.push_back({"errors", errs.t});
  rep.summary["jobs"] = st.jobs;
  rep.summary["failures"] = st.failures;
  if (st.jobs > 0 && st.failures == st.jobs) {
    total_failure = true;
    resource = resource || errs.resource;
  }
  for (auto& p : emit_report(rep, out_dir, "csv")) st.files.push_back(p);
  st.exit_code = total_failure ? (resource ? 3 : 4) : 0;
  return st;
}

}  // namespace gaussperc
