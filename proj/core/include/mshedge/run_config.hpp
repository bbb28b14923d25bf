#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mshedge/classifier.hpp"
#include "mshedge/cnn.hpp"
#include "mshedge/dataset.hpp"
#include "mshedge/hedge_engine.hpp"
#include "mshedge/heston_sim.hpp"

namespace mshedge {

/// Pricing assumptions for an ingested real series: the Heston dynamics used
/// for deltas, and a trailing realized-variance estimate for V_t.
struct RealDataConfig {
  std::filesystem::path csv;  // empty = backtest on a synthetic test path
  bool truncate = false;      // keep the last 31 trading rows of a longer file
  bool force = false;         // accept gaps that are not weekends/holidays
  double strike = 0.0;        // 0 = s0 / moneyness
  HestonParams params;        // mu and s0 unused
  std::size_t variance_window = 10;
};

/// Everything a pipeline run depends on. Parsed from an INI-style file:
///
///   [ranges]   mu = -0.005, 0.005   (one "lo, hi" pair per Heston field)
///   [hedge]    f, gamma, r, cost_price_timing, moneyness
///   [simulate] n_paths, substeps, seed
///   [dataset]  cutoffs = 5,10,..., test_fraction
///   [train]    CNN, logistic and forest hyperparameters
///   [backtest] path_id, [real] csv/strike/dynamics
///   [sweep]    gammas, n_paths
struct RunConfig {
  ParamRanges ranges;
  HedgeConfig hedge;
  double moneyness = 1.1;
  std::size_t n_paths = 1000;
  std::size_t substeps = 8;
  std::uint64_t seed = 42;
  std::vector<int> cutoffs{5, 10, 15, 20, 25, 30};
  double test_fraction = 0.2;
  TrainConfig train;
  BaselineHyper baseline;
  long long backtest_path_id = -1;  // -1 = first test path
  RealDataConfig real;
  std::vector<double> sweep_gammas{0.1, 0.5, 1.0, 1.5, 3.0, 5.0};
  std::size_t sweep_paths = 100;

  /// Throws ConfigError when any module invariant is violated.
  void validate() const;
  DatasetConfig dataset_config() const;
  /// Canonical text form; identical configs give identical text.
  std::string canonical() const;
  /// FNV-1a of canonical() plus the contents of any referenced input file.
  std::string hash() const;
};

/// Parses the INI text. Relative paths resolve against `base_dir`.
/// Unknown sections or keys are configuration errors.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace mshedge
