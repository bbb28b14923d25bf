// mshedge: staged pipeline driver.
//
//   mshedge simulate --config run.ini --out out/
//   mshedge label    --config run.ini --out out/
//   ...
//   mshedge all      --config run.ini --out out/ --threads 4

#include <cstdlib>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mshedge/errors.hpp"
#include "mshedge/pipeline.hpp"
#include "mshedge/run_config.hpp"

namespace {

struct Common {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;
  bool verbose = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config_path, "INI run configuration (defaults apply when omitted)");
  cmd->add_option("-o,--out", c.out_dir, "Artifact directory")->capture_default_str();
  cmd->add_option("--seed", c.seed, "Override the master seed");
  cmd->add_option("-j,--threads", c.threads, "Worker threads, 0 = all cores (outputs do not depend on it)");
  cmd->add_flag("-v,--verbose", c.verbose, "Progress on stderr");
}

int run(const Common& c, const std::vector<mshedge::Stage>& stages) {
  mshedge::RunConfig cfg = c.config_path.empty() ? mshedge::RunConfig{} : mshedge::load_run_config(c.config_path);
  if (c.seed) cfg.seed = *c.seed;
  mshedge::PipelineOptions opts;
  opts.out_dir = c.out_dir;
  opts.threads = c.threads;
  opts.verbose = c.verbose;
  for (mshedge::Stage s : stages) {
    mshedge::run_pipeline(cfg, s, opts);
    if (c.verbose) std::cerr << "done: " << mshedge::to_string(s) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-scale delta hedging: simulate, label, train, evaluate, backtest, sweep"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(MSHEDGE_CLI_VERSION));

  const auto describe = [](mshedge::Stage s) -> std::string {
    switch (s) {
      case mshedge::Stage::kSimulate: return "Simulate Heston paths and their parameters";
      case mshedge::Stage::kLabel: return "Price paths and label the best rebalancing period";
      case mshedge::Stage::kTrain: return "Build datasets and train the CNN ensemble and baselines";
      case mshedge::Stage::kEvaluate: return "One-vs-rest AUC on the held-out paths";
      case mshedge::Stage::kBacktest: return "Multi-scale backtest of all 13 strategies";
      case mshedge::Stage::kSweep: return "Reward gap against risk aversion";
    }
    return {};
  };
  Common common;
  std::vector<mshedge::Stage> selected;
  for (mshedge::Stage s : mshedge::all_stages()) {
    auto* cmd = app.add_subcommand(std::string(mshedge::to_string(s)), describe(s));
    add_common(cmd, common);
    cmd->callback([&selected, s] { selected = {s}; });
  }
  auto* all = app.add_subcommand("all", "Run every stage in order");
  add_common(all, common);
  all->callback([&selected] { selected = mshedge::all_stages(); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(mshedge::ExitCode::kConfig);
  }

  try {
    return run(common, selected);
  } catch (const mshedge::Error& e) {
    std::cerr << "mshedge: " << e.what() << "\n";
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    std::cerr << "mshedge: unexpected error: " << e.what() << "\n";
    return EXIT_FAILURE;
  }
}
