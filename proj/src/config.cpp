#include "gaussperc/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "gaussperc/errors.hpp"

namespace gaussperc {

namespace pt = boost::property_tree;

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> k{"capacity_table",  "sample",        "covariance_validation",
                                          "percolate",       "correlation_length", "decay_rate",
                                          "diameter"};
  return k;
}

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> k{
      {"experiment", {"kind", "seed", "threads"}},
      {"kernel", {"family", "alpha", "gamma", "dim", "join_radius"}},
      {"event", {"kind", "levels", "radii", "r_in", "rho"}},
      {"sampling",
       {"h", "trials", "method", "directions", "amplitude", "level_target", "padding", "window"}},
      {"fit", {"model", "offset", "max_rel_se", "exclude_smallest"}},
      {"capacity", {"domain", "R", "n", "cell", "alphas", "tol", "s", "r", "centers"}},
      {"covariance", {"lags", "window"}},
      {"correlation", {"eps", "R0", "R_max", "refine_steps"}},
  };
  return k;
}

std::vector<std::string> split_list(const std::string& s) {
  std::string t = s;
  std::replace(t.begin(), t.end(), ',', ' ');
  std::istringstream in(t);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  }
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + key + "': expected a boolean, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& w : split_list(v)) out.push_back(to_double(key, w));
  return out;
}

std::size_t to_count(const std::string& key, const std::string& v) {
  const long long x = to_int(key, v);
  if (x < 0) throw ConfigError("key '" + key + "' must be non-negative");
  return static_cast<std::size_t>(x);
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  ExperimentConfig c;
  for (const auto& [section, body] : tree) {
    auto sec = known_keys().find(section);
    if (sec == known_keys().end()) {
      if (body.empty()) throw ConfigError("keys must live inside a section: '" + section + "'");
      throw ConfigError("unknown section [" + section + "]");
    }
    for (const auto& [key, node] : body) {
      if (!sec->second.count(key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
      const std::string v = node.get_value<std::string>();
      const std::string full = section + "." + key;
      if (section == "experiment") {
        if (key == "kind") c.kind = v;
        if (key == "seed") c.seed = static_cast<std::uint64_t>(to_count(full, v));
        if (key == "threads") c.threads = static_cast<unsigned>(to_count(full, v));
      } else if (section == "kernel") {
        if (key == "family") c.kernel.family = v;
        if (key == "alpha") c.kernel.alpha = to_double(full, v);
        if (key == "gamma") c.kernel.gamma = to_double(full, v);
        if (key == "dim") c.kernel.dim = static_cast<int>(to_int(full, v));
        if (key == "join_radius") c.kernel.join_radius = to_double(full, v);
      } else if (section == "event") {
        if (key == "kind") c.event = event_from_string(v);
        if (key == "levels") c.levels = to_list(full, v);
        if (key == "radii") c.radii = to_list(full, v);
        if (key == "r_in") c.r_in = to_double(full, v);
        if (key == "rho") c.rho = to_double(full, v);
      } else if (section == "sampling") {
        if (key == "h") c.h = to_double(full, v);
        if (key == "trials") c.trials = to_count(full, v);
        if (key == "method") c.method = v;
        if (key == "directions") c.directions = static_cast<int>(to_int(full, v));
        if (key == "amplitude") c.amplitude = to_double(full, v);
        if (key == "level_target") c.level_target = to_double(full, v);
        if (key == "padding") c.padding = to_double(full, v);
        if (key == "window") c.window = to_double(full, v);
      } else if (section == "fit") {
        if (key == "model") c.fit_model = v;
        if (key == "offset") c.fit_offset = to_bool(full, v);
        if (key == "max_rel_se") c.max_rel_se = to_double(full, v);
        if (key == "exclude_smallest") c.exclude_smallest = to_bool(full, v);
      } else if (section == "capacity") {
        if (key == "domain") c.domain = v;
        if (key == "R") c.cap_R = to_double(full, v);
        if (key == "n") c.cap_n = to_count(full, v);
        if (key == "cell") c.cell = to_double(full, v);
        if (key == "alphas") c.alphas = to_list(full, v);
        if (key == "tol") c.cap_tol = to_double(full, v);
        if (key == "s") c.s = to_double(full, v);
        if (key == "r") c.r = to_double(full, v);
        if (key == "centers") {
          c.centers.clear();
          for (const auto& w : split_list(v)) {
            const auto colon = w.find(':');
            if (colon == std::string::npos) throw ConfigError("centers must be x:y pairs");
            c.centers.push_back(
                {to_double(full, w.substr(0, colon)), to_double(full, w.substr(colon + 1)), 0.0});
          }
        }
      } else if (section == "covariance") {
        if (key == "lags") c.lags = to_list(full, v);
        if (key == "window") c.window = to_double(full, v);
      } else if (section == "correlation") {
        if (key == "eps") c.eps = to_double(full, v);
        if (key == "R0") c.R0 = to_double(full, v);
        if (key == "R_max") c.R_max = to_double(full, v);
        if (key == "refine_steps") c.refine_steps = static_cast<int>(to_int(full, v));
      }
    }
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate(const ExperimentConfig& c) {
  const auto& kinds = experiment_kinds();
  if (!c.kind.empty() && std::find(kinds.begin(), kinds.end(), c.kind) == kinds.end())
    throw ConfigError("unknown experiment kind '" + c.kind + "'");
  try {
    family_from_string(c.kernel.family);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (c.kernel.dim < 1 || c.kernel.dim > 3) throw ConfigError("kernel.dim must be 1, 2 or 3");
  if (!(c.h > 0.0)) throw ConfigError("sampling.h must be positive");
  if (c.method != "naive" && c.method != "is" && c.method != "is_rb")
    throw ConfigError("sampling.method must be naive, is or is_rb");
  if (c.fit_model != "power" && c.fit_model != "power_over_log" && c.fit_model != "log_power")
    throw ConfigError("fit.model must be power, power_over_log or log_power");
  if (c.radii.empty()) throw ConfigError("event.radii is empty");
  for (std::size_t i = 0; i < c.radii.size(); ++i) {
    if (!(c.radii[i] > 0.0)) throw ConfigError("event.radii must be positive");
    if (i > 0 && !(c.radii[i] > c.radii[i - 1]))
      throw ConfigError("event.radii must be strictly increasing");
  }
  if (c.levels.empty()) throw ConfigError("event.levels is empty");
  if (!(c.padding >= 4.0)) throw ConfigError("sampling.padding must be at least 4");
  if (c.threads == 0) throw ConfigError("experiment.threads must be at least 1");
}

}  // namespace gaussperc
