#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mshedge/run_config.hpp"

namespace mshedge {

enum class Stage { kSimulate, kLabel, kTrain, kEvaluate, kBacktest, kSweep };

std::string_view to_string(Stage stage);
/// Throws ConfigError for an unknown name.
Stage stage_from_string(std::string_view name);
/// All stages in dependency order.
std::vector<Stage> all_stages();

struct PipelineOptions {
  std::filesystem::path out_dir = "out";
  std::size_t threads = 0;  // 0 = hardware concurrency; never changes outputs
  bool verbose = false;
};

/// Runs one stage, writing its artifacts and `<stage>.json` manifest into
/// out_dir. Every file carries the config hash; a stage whose inputs are
/// missing or came from a different config throws DependencyError.
void run_pipeline(const RunConfig& config, Stage stage, const PipelineOptions& opts);

/// Trailing realized variance: v[t] is the mean squared log return over the
/// last `window` days up to t; v[0] = v0.
std::vector<double> realized_variance_path(std::span<const double> s, std::size_t window, double v0);

/// Heston deltas along an ingested series, using the configured dynamics and
/// the realized variance in place of the unobserved V_t.
std::vector<double> real_series_deltas(const MarketSeries& series, const RealDataConfig& real);

/// Reads config.real.csv into a 31-day series; the strike defaults to
/// s[0] / moneyness.
MarketSeries ingest_real_target(const RunConfig& config);

/// Files a stage writes (relative to out_dir), as recorded in its manifest.
std::vector<std::string> stage_outputs(const std::filesystem::path& out_dir, Stage stage);

}  // namespace mshedge
