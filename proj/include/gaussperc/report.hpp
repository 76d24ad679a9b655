#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gaussperc/capacity.hpp"
#include "gaussperc/kernels.hpp"
#include "gaussperc/percolation.hpp"

namespace gaussperc {

using json = nlohmann::ordered_json;

/// Column-ordered table; cells are JSON scalars so the same table can be
/// written as CSV or JSON.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<json>> rows;

  void add(std::vector<json> row);
};

struct Report {
  std::vector<std::pair<std::string, Table>> tables;
  json summary = json::object();
};

/// 17 significant digits; "nan", "inf", "-inf" for non-finite values.
std::string format_double(double x);
std::string to_csv(const Table& t);
json to_json(const Table& t);
/// Parses a JSON array of row objects written by to_json.
Table table_from_json(const json& j);

/// csv: <name>.csv per table; json: <name>.json per table. summary.json is
/// written in both cases. Returns the paths written, in order.
std::vector<std::string> emit_report(const Report& r, const std::string& dir,
                                     const std::string& format = "csv");

/// kernel,alpha,gamma,event,level,R,method,trials,ess,p_hat,se,ci_lo,ci_hi,seed
const std::vector<std::string>& estimate_header();
std::vector<json> estimate_row(const Kernel& k, const Estimate& e);

json to_json(const Estimate& e);
json to_json(const CapacityResult& r);

void write_text(const std::string& path, const std::string& text);

}  // namespace gaussperc
