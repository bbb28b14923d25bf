#include "mshedge/dataset.hpp"

#include <cmath>
#include <numbers>

#include "json_io.hpp"
#include "mshedge/errors.hpp"
#include "mshedge/parallel.hpp"
#include "mshedge/random.hpp"
#include "mshedge/text_io.hpp"

namespace mshedge {

FeatureTensor featurize(const MarketSeries& series, int cutoff_day) {
  constexpr int kDays = static_cast<int>(FeatureTensor::kDays);
  if (cutoff_day < 1 || cutoff_day > kDays) throw InputError("featurize: cutoff_day must lie in [1, 30]");
  if (series.s.size() < static_cast<std::size_t>(cutoff_day) || series.c.size() < series.s.size()) {
    throw InputError("featurize: series shorter than the cutoff");
  }
  const double s0 = series.s[0];
  if (!(s0 > 0.0)) throw InputError("featurize: zero initial stock price");
  const double c_norm = series.c[0] < 1e-9 ? s0 : series.c[0];

  FeatureTensor x;
  x.cutoff_day = cutoff_day;
  for (int t = 0; t < cutoff_day; ++t) {
    const auto d = static_cast<std::size_t>(t);
    x.values[d] = series.s[d] / s0;
    x.values[FeatureTensor::kDays + d] = series.c[d] / c_norm;
    x.mask[d] = 1.0;
  }
  for (double value : x.values) {
    if (!std::isfinite(value)) throw InputError("featurize: non-finite feature");
  }
  return x;
}

HestonParams path_params(const DatasetConfig& cfg, std::size_t path_id) {
  return sample_params(cfg.ranges, stream_seed(cfg.master_seed, StreamKind::kParams, path_id));
}

LabeledPath generate_labeled_path(const DatasetConfig& cfg, std::size_t path_id) {
  LabeledPath out;
  out.path_id = path_id;
  out.params = path_params(cfg, path_id);
  SinglePath path = simulate_path(out.params, static_cast<std::size_t>(cfg.maturity_day), cfg.substeps,
                                  cfg.master_seed, path_id);
  const CallSpec spec = CallSpec::at_moneyness(out.params.s0, cfg.moneyness, cfg.maturity_day, cfg.hedge.r);
  out.priced = price_path_with_deltas(path.s, path.v, out.params, spec);
  out.v = std::move(path.v);
  out.label = label_from_daily_deltas(out.priced.series, out.priced.delta, cfg.hedge);
  return out;
}

std::vector<LabeledPath> generate_labeled_paths(const DatasetConfig& cfg, std::size_t threads) {
  if (cfg.n_paths < 1) throw ConfigError("dataset: n_paths must be >= 1");
  std::vector<LabeledPath> paths(cfg.n_paths);
  parallel_for(cfg.n_paths, threads, [&](std::size_t i) { paths[i] = generate_labeled_path(cfg, i); });
  return paths;
}

std::vector<Sample> Dataset::for_cutoff(int cutoff_day) const {
  std::vector<Sample> out;
  for (const auto& s : samples) {
    if (s.features.cutoff_day == cutoff_day) out.push_back(s);
  }
  return out;
}

Dataset build_dataset(const DatasetConfig& cfg, const std::vector<LabeledPath>& paths) {
  for (int c : cfg.cutoffs) {
    if (c < 1 || c > static_cast<int>(FeatureTensor::kDays)) throw ConfigError("dataset: cutoff outside [1, 30]");
  }
  Dataset ds;
  ds.config = cfg;
  ds.samples.reserve(paths.size() * cfg.cutoffs.size());
  for (const auto& p : paths) {
    for (int c : cfg.cutoffs) {
      ds.samples.push_back(Sample{featurize(p.priced.series, c), p.label.label_index, p.path_id});
    }
  }
  return ds;
}

Dataset build_dataset(const DatasetConfig& cfg, std::size_t threads) {
  return build_dataset(cfg, generate_labeled_paths(cfg, threads));
}

std::pair<Dataset, Dataset> split_by_path(const Dataset& all, double test_fraction) {
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) throw ConfigError("test_fraction must lie in [0, 1)");
  const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(all.config.n_paths) * (1.0 - test_fraction)));
  Dataset train, test;
  train.config = test.config = all.config;
  train.split = "train";
  test.split = "test";
  for (const auto& s : all.samples) (s.path_id < n_train ? train : test).samples.push_back(s);
  return {std::move(train), std::move(test)};
}

std::array<std::size_t, PeriodGrid::kSize> label_counts(const std::vector<LabeledPath>& paths) {
  std::array<std::size_t, PeriodGrid::kSize> counts{};
  for (const auto& p : paths) ++counts[p.label.label_index];
  return counts;
}

HistogramFit fit_histogram_models(const std::array<std::size_t, PeriodGrid::kSize>& counts) {
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  if (total <= 0.0) throw InputError("fit_histogram_models: all counts are zero");

  HistogramFit fit;
  double mean = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    fit.observed[k] = static_cast<double>(counts[k]) / total;
    mean += static_cast<double>(k) * fit.observed[k];
  }
  double var = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double d = static_cast<double>(k) - mean;
    var += d * d * fit.observed[k];
  }
  fit.poisson_rate = mean;
  fit.gaussian_mean = mean;
  fit.gaussian_std = std::sqrt(var);

  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double kk = static_cast<double>(k);
    if (mean == 0.0) {
      fit.poisson[k] = k == 0 ? 1.0 : 0.0;
    } else {
      fit.poisson[k] = std::exp(kk * std::log(mean) - mean - std::lgamma(kk + 1.0));
    }
    if (fit.gaussian_std == 0.0) {
      fit.gaussian[k] = kk == mean ? 1.0 : 0.0;
    } else {
      const double z = (kk - mean) / fit.gaussian_std;
      fit.gaussian[k] = std::exp(-0.5 * z * z) / (fit.gaussian_std * std::sqrt(2.0 * std::numbers::pi));
    }
  }
  return fit;
}

std::string histogram_csv(const HistogramFit& fit, const std::array<std::size_t, PeriodGrid::kSize>& counts) {
  std::string out = "tau,rank,count,frequency,poisson_fit,gaussian_fit\n";
  for (std::size_t k = 0; k < PeriodGrid::kSize; ++k) {
    out += std::to_string(PeriodGrid::tau(k)) + ',' + std::to_string(k) + ',' + std::to_string(counts[k]) + ',' +
           format_double(fit.observed[k]) + ',' + format_double(fit.poisson[k]) + ',' + format_double(fit.gaussian[k]) +
           '\n';
  }
  return out;
}

std::string dataset_csv(const std::vector<Sample>& samples) {
  std::string out = "path_id,label";
  for (const char* ch : {"s", "c"}) {
    for (std::size_t t = 0; t < FeatureTensor::kDays; ++t) out += std::string(",") + ch + "_" + std::to_string(t);
  }
  for (std::size_t t = 0; t < FeatureTensor::kDays; ++t) out += ",m_" + std::to_string(t);
  out += '\n';
  for (const auto& s : samples) {
    out += std::to_string(s.path_id) + ',' + std::to_string(s.label_index);
    for (double x : s.features.values) out += ',' + format_double(x);
    for (double m : s.features.mask) out += ',' + format_double(m);
    out += '\n';
  }
  return out;
}

std::vector<Sample> parse_dataset_csv(const std::filesystem::path& path, int cutoff_day) {
  CsvTable table = read_csv(path);
  constexpr std::size_t kCols = 2 + FeatureTensor::kSize + FeatureTensor::kDays;
  if (table.header.size() != kCols) throw InputError(path.string() + ": unexpected column count");
  std::vector<Sample> out;
  out.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    try {
      Sample s;
      s.path_id = static_cast<std::size_t>(parse_int(row[0]));
      s.label_index = static_cast<std::size_t>(parse_int(row[1]));
      if (s.label_index >= PeriodGrid::kSize) throw InputError("label index out of range");
      s.features.cutoff_day = cutoff_day;
      for (std::size_t k = 0; k < FeatureTensor::kSize; ++k) s.features.values[k] = parse_double(row[2 + k]);
      for (std::size_t k = 0; k < FeatureTensor::kDays; ++k) {
        s.features.mask[k] = parse_double(row[2 + FeatureTensor::kSize + k]);
      }
      out.push_back(s);
    } catch (const ParseError&) {
      throw;
    } catch (const InputError& e) {
      throw ParseError(path.string(), table.row_lines[i], e.what());
    }
  }
  return out;
}

namespace {

Json dataset_config_json(const DatasetConfig& cfg) {
  return Json{{"n_paths", cfg.n_paths},
              {"ranges", ranges_to_json(cfg.ranges)},
              {"hedge", hedge_to_json(cfg.hedge)},
              {"cutoffs", cfg.cutoffs},
              {"master_seed", cfg.master_seed},
              {"substeps", cfg.substeps},
              {"moneyness", cfg.moneyness},
              {"maturity_day", cfg.maturity_day}};
}

}  // namespace

std::string to_json_string(const DatasetConfig& cfg) { return dataset_config_json(cfg).dump(); }

std::string dataset_manifest_json(const Dataset& ds) {
  Json j;
  j["config"] = dataset_config_json(ds.config);
  j["split"] = ds.split;
  j["n_samples"] = ds.samples.size();
  Json files = Json::array();
  for (int c : ds.config.cutoffs) files.push_back("dataset_cutoff_" + std::to_string(c) + ".csv");
  j["files"] = files;
  return j.dump(2) + "\n";
}

void write_dataset(const Dataset& ds, const std::filesystem::path& dir, const std::string& header_comment) {
  const std::string prefix = header_comment.empty() ? std::string() : "# " + header_comment + "\n";
  for (int c : ds.config.cutoffs) {
    write_file(dir / ("dataset_cutoff_" + std::to_string(c) + ".csv"), prefix + dataset_csv(ds.for_cutoff(c)));
  }
  write_file(dir / "dataset.json", dataset_manifest_json(ds));
}

}  // namespace mshedge
