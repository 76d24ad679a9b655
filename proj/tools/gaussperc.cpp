#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gaussperc/config.hpp"
#include "gaussperc/errors.hpp"
#include "gaussperc/experiments.hpp"

using namespace gaussperc;

int main(int argc, char** argv) {
  CLI::App app{"Gaussian excursion-set percolation experiments"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  // percolate overrides
  std::optional<std::string> method;
  std::optional<std::size_t> trials;

  for (const char* name : {"capacity", "sample", "percolate", "rates", "diameter"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "INI config file")->required();
    sub->add_option("--out", out_dir, "output directory")->required();
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    if (std::string(name) == "percolate" || std::string(name) == "rates") {
      sub->add_option("--method", method, "naive, is or is_rb");
      sub->add_option("--trials", trials, "trials per job");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    ExperimentConfig c = load_config(config_path);
    if (seed) c.seed = *seed;
    if (threads) c.threads = *threads;
    if (method) c.method = *method;
    if (trials) c.trials = *trials;
    const RunStatus st = run_config(c, command, out_dir);
    for (const auto& f : st.files) std::cout << f << "\n";
    if (st.failures > 0)
      std::cerr << st.failures << " of " << st.jobs << " jobs failed; see errors.csv\n";
    return st.exit_code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ResourceError& e) {
    std::cerr << "resource error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
