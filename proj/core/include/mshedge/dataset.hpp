#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mshedge/hedge_engine.hpp"
#include "mshedge/heston_sim.hpp"
#include "mshedge/pricer.hpp"

namespace mshedge {

/// Partial-information input: normalized S and C over days 0..29, zeroed
/// from cutoff_day on. Channel-major: values[ch * kDays + day].
struct FeatureTensor {
  static constexpr std::size_t kChannels = 2;
  static constexpr std::size_t kDays = 30;
  static constexpr std::size_t kSize = kChannels * kDays;

  std::array<double, kSize> values{};
  std::array<double, kDays> mask{};
  int cutoff_day = kDays;

  double at(std::size_t channel, std::size_t day) const { return values[channel * kDays + day]; }
};

/// Observes days [0, cutoff_day): S / s[0] and C / c[0] (C / s[0] when
/// c[0] < 1e-9). Throws InputError on a zero initial price or bad cutoff.
FeatureTensor featurize(const MarketSeries& series, int cutoff_day);

struct Sample {
  FeatureTensor features;
  std::size_t label_index = 0;
  std::size_t path_id = 0;
};

/// Everything needed to regenerate a labeled corpus.
struct DatasetConfig {
  std::size_t n_paths = 1000;
  ParamRanges ranges;
  HedgeConfig hedge;  // tau is ignored; all eight periods are scored
  std::vector<int> cutoffs{5, 10, 15, 20, 25, 30};
  std::uint64_t master_seed = 42;
  std::size_t substeps = 8;
  double moneyness = 1.1;
  int maturity_day = PeriodGrid::kHorizon;
};

/// A simulated, priced and labeled path.
struct LabeledPath {
  std::size_t path_id = 0;
  HestonParams params;
  std::vector<double> v;  // variance path
  PricedPath priced;      // series plus daily Heston deltas
  PeriodLabel label;
};

/// Parameters for path `path_id`: stream `path_id` of the params kind.
HestonParams path_params(const DatasetConfig& cfg, std::size_t path_id);

/// Samples parameters, simulates, prices and labels path `path_id`.
LabeledPath generate_labeled_path(const DatasetConfig& cfg, std::size_t path_id);

/// All paths 0..n_paths-1; deterministic for any thread count.
std::vector<LabeledPath> generate_labeled_paths(const DatasetConfig& cfg, std::size_t threads = 0);

struct Dataset {
  std::vector<Sample> samples;
  DatasetConfig config;
  std::string split = "all";

  std::vector<Sample> for_cutoff(int cutoff_day) const;
};

/// One sample per (path, cutoff); the label is computed once per path on
/// the full horizon and shared across cutoffs.
Dataset build_dataset(const DatasetConfig& cfg, std::size_t threads = 0);
Dataset build_dataset(const DatasetConfig& cfg, const std::vector<LabeledPath>& paths);

/// Paths with id < floor(n_paths * (1 - test_fraction)) train, the rest test.
std::pair<Dataset, Dataset> split_by_path(const Dataset& all, double test_fraction);

/// Label counts per period over a set of labeled paths.
std::array<std::size_t, PeriodGrid::kSize> label_counts(const std::vector<LabeledPath>& paths);

/// Maximum-likelihood Poisson and Gaussian fits over the period rank 0..7.
struct HistogramFit {
  double poisson_rate = 0.0;
  double gaussian_mean = 0.0;
  double gaussian_std = 0.0;
  std::array<double, PeriodGrid::kSize> observed{};   // relative frequencies
  std::array<double, PeriodGrid::kSize> poisson{};    // pmf at each rank
  std::array<double, PeriodGrid::kSize> gaussian{};   // density at each rank (unit bins)
};

HistogramFit fit_histogram_models(const std::array<std::size_t, PeriodGrid::kSize>& counts);
std::string histogram_csv(const HistogramFit& fit, const std::array<std::size_t, PeriodGrid::kSize>& counts);

/// Dataset CSV for one cutoff: path_id, label, s_0..s_29, c_0..c_29, m_0..m_29.
std::string dataset_csv(const std::vector<Sample>& samples);
std::vector<Sample> parse_dataset_csv(const std::filesystem::path& path, int cutoff_day);
std::string dataset_manifest_json(const Dataset& ds);
/// Writes dataset_cutoff_<c>.csv for every cutoff plus dataset.json.
void write_dataset(const Dataset& ds, const std::filesystem::path& dir, const std::string& header_comment = {});

std::string to_json_string(const DatasetConfig& cfg);

}  // namespace mshedge
