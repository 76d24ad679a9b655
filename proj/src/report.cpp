#include "gaussperc/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "gaussperc/errors.hpp"

namespace gaussperc {

void Table::add(std::vector<json> row) {
  if (row.size() != header.size()) throw DomainError("row width does not match the header");
  rows.push_back(std::move(row));
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::string csv_cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return v.dump();
  if (v.is_number_float()) return format_double(v.get<double>());
  std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

// JSON has no NaN/inf; keep them as strings
json json_cell(const json& v) {
  if (v.is_number_float() && !std::isfinite(v.get<double>())) return format_double(v.get<double>());
  return v;
}

}  // namespace

std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.header.size(); ++i) out += (i ? "," : "") + t.header[i];
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_cell(row[i]);
    out += "\n";
  }
  return out;
}

json to_json(const Table& t) {
  json arr = json::array();
  for (const auto& row : t.rows) {
    json o = json::object();
    for (std::size_t i = 0; i < row.size(); ++i) o[t.header[i]] = json_cell(row[i]);
    arr.push_back(std::move(o));
  }
  return json{{"columns", t.header}, {"rows", arr}};
}

Table table_from_json(const json& j) {
  Table t;
  t.header = j.at("columns").get<std::vector<std::string>>();
  for (const auto& o : j.at("rows")) {
    std::vector<json> row;
    for (const auto& c : t.header) row.push_back(o.at(c));
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::vector<std::string> emit_report(const Report& r, const std::string& dir,
                                     const std::string& format) {
  if (format != "csv" && format != "json") throw DomainError("report format must be csv or json");
  std::filesystem::create_directories(dir);
  std::vector<std::string> paths;
  for (const auto& [name, table] : r.tables) {
    const std::string p = dir + "/" + name + "." + format;
    write_text(p, format == "csv" ? to_csv(table) : to_json(table).dump(2) + "\n");
    paths.push_back(p);
  }
  const std::string p = dir + "/summary.json";
  write_text(p, r.summary.dump(2) + "\n");
  paths.push_back(p);
  return paths;
}

const std::vector<std::string>& estimate_header() {
  static const std::vector<std::string> h{"kernel", "alpha", "gamma",  "event", "level",
                                          "R",      "method", "trials", "ess",   "p_hat",
                                          "se",     "ci_lo",  "ci_hi",  "seed"};
  return h;
}

std::vector<json> estimate_row(const Kernel& k, const Estimate& e) {
  return {to_string(k.family()),
          k.alpha(),
          k.gamma(),
          to_string(e.event.kind),
          e.event.level,
          e.event.R,
          e.method,
          static_cast<std::uint64_t>(e.trials),
          e.ess,
          e.p_hat,
          e.se,
          e.ci_lo,
          e.ci_hi,
          e.seed};
}

json to_json(const Estimate& e) {
  json j = {{"event", to_string(e.event.kind)},
            {"level", e.event.level},
            {"R", e.event.R},
            {"method", e.method},
            {"trials", e.trials},
            {"p_hat", e.p_hat},
            {"se", e.se},
            {"ci_lo", e.ci_lo},
            {"ci_hi", e.ci_hi},
            {"ess", e.ess},
            {"reliable", e.reliable},
            {"amplitude", e.amplitude},
            {"seed", e.seed},
            {"warnings", e.warnings}};
  return j;
}

json to_json(const CapacityResult& r) {
  return {{"capacity", r.capacity},
          {"energy", r.energy},
          {"gap", r.duality_gap},
          {"capacity_upper", r.capacity_upper},
          {"potential_min_on_support", r.potential_min_on_support},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"n", r.n},
          {"cell_size", r.cell_size}};
}

}  // namespace gaussperc
