#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "mshedge/dataset.hpp"
#include "mshedge/errors.hpp"
#include "mshedge/text_io.hpp"

using namespace mshedge;

namespace {

DatasetConfig small_config(std::size_t n, std::uint64_t seed = 42) {
  DatasetConfig cfg;
  cfg.n_paths = n;
  cfg.master_seed = seed;
  cfg.substeps = 4;
  return cfg;
}

}  // namespace

TEST(Featurize, FullCutoffHasNoPadding) {
  const auto lp = fixture::seeded_path(0);
  const FeatureTensor x = featurize(lp.priced.series, 30);
  for (double m : x.mask) EXPECT_EQ(m, 1.0);
  EXPECT_EQ(x.at(0, 0), 1.0);
  EXPECT_EQ(x.at(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(x.at(0, 29), lp.priced.series.s[29] / lp.priced.series.s[0]);
  EXPECT_DOUBLE_EQ(x.at(1, 17), lp.priced.series.c[17] / lp.priced.series.c[0]);
}

TEST(Featurize, PadsAfterCutoff) {
  const auto lp = fixture::seeded_path(1);
  const FeatureTensor x = featurize(lp.priced.series, 10);
  EXPECT_EQ(x.cutoff_day, 10);
  for (std::size_t d = 0; d < 30; ++d) {
    EXPECT_EQ(x.mask[d], d < 10 ? 1.0 : 0.0);
    if (d >= 10) {
      EXPECT_EQ(x.at(0, d), 0.0);
      EXPECT_EQ(x.at(1, d), 0.0);
    }
  }
}

TEST(Featurize, WorthlessCallNormalizedByStock) {
  MarketSeries m = fixture::flat_series(100.0, 0.0);
  m.c[3] = 0.5;
  const FeatureTensor x = featurize(m, 5);
  EXPECT_EQ(x.at(1, 3), 0.005);
}

TEST(Featurize, NoLeakageBeyondCutoff) {
  const auto lp = fixture::seeded_path(2);
  for (int cutoff : {5, 12, 25}) {
    MarketSeries altered = lp.priced.series;
    for (std::size_t t = static_cast<std::size_t>(cutoff); t < altered.size(); ++t) {
      altered.s[t] *= 1.7;
      altered.c[t] += 3.0;
    }
    const FeatureTensor a = featurize(lp.priced.series, cutoff), b = featurize(altered, cutoff);
    EXPECT_EQ(a.values, b.values);
    EXPECT_EQ(a.mask, b.mask);
  }
}

TEST(Featurize, Errors) {
  MarketSeries m = fixture::flat_series(100.0, 5.0);
  EXPECT_THROW(featurize(m, 0), InputError);
  EXPECT_THROW(featurize(m, 31), InputError);
  m.s[0] = 0.0;
  EXPECT_THROW(featurize(m, 10), InputError);
}

TEST(Dataset, CsvRoundTripIsIdentity) {
  const auto lp = fixture::seeded_path(3);
  const Sample s{featurize(lp.priced.series, 10), lp.label.label_index, 3};
  const auto dir = fixture::temp_dir("dataset_rt");
  write_file(dir / "d.csv", "# a comment\n" + dataset_csv({s}));
  const auto back = parse_dataset_csv(dir / "d.csv", 10);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].features.values, s.features.values);
  EXPECT_EQ(back[0].features.mask, s.features.mask);
  EXPECT_EQ(back[0].label_index, s.label_index);
  EXPECT_EQ(back[0].path_id, 3u);
}

TEST(Dataset, LabelSharedAcrossCutoffs) {
  DatasetConfig cfg = small_config(1);
  cfg.cutoffs = {5, 10};
  const Dataset ds = build_dataset(cfg);
  ASSERT_EQ(ds.samples.size(), 2u);
  EXPECT_EQ(ds.samples[0].label_index, ds.samples[1].label_index);
  EXPECT_EQ(ds.samples[0].features.cutoff_day, 5);
  EXPECT_EQ(ds.samples[1].features.cutoff_day, 10);
}

TEST(Dataset, SameSeedGivesIdenticalFiles) {
  const DatasetConfig cfg = small_config(6, 9);
  const auto a = fixture::temp_dir("dataset_a"), b = fixture::temp_dir("dataset_b");
  write_dataset(build_dataset(cfg, 1), a, "x");
  write_dataset(build_dataset(cfg, 3), b, "x");
  for (int c : cfg.cutoffs) {
    const std::string name = "dataset_cutoff_" + std::to_string(c) + ".csv";
    EXPECT_EQ(read_file(a / name), read_file(b / name));
  }
  EXPECT_EQ(read_file(a / "dataset.json"), read_file(b / "dataset.json"));
}

TEST(Dataset, ParallelGenerationIsDeterministic) {
  const DatasetConfig cfg = small_config(5, 3);
  const auto one = generate_labeled_paths(cfg, 1);
  const auto many = generate_labeled_paths(cfg, 4);
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].priced.series.c, many[i].priced.series.c);
    EXPECT_EQ(one[i].label.label_index, many[i].label.label_index);
  }
}

TEST(Dataset, SplitKeepsPathsTogether) {
  const Dataset ds = build_dataset(small_config(5));
  const auto [train, test] = split_by_path(ds, 0.4);
  EXPECT_EQ(train.samples.size(), 3u * 6u);
  EXPECT_EQ(test.samples.size(), 2u * 6u);
  for (const auto& s : train.samples) EXPECT_LT(s.path_id, 3u);
  for (const auto& s : test.samples) EXPECT_GE(s.path_id, 3u);
  EXPECT_THROW(split_by_path(ds, 1.0), ConfigError);
}

TEST(HistogramFit, DegenerateMassAtZero) {
  const HistogramFit fit = fit_histogram_models({5, 0, 0, 0, 0, 0, 0, 0});
  EXPECT_EQ(fit.poisson_rate, 0.0);
  EXPECT_EQ(fit.gaussian_mean, 0.0);
  EXPECT_EQ(fit.poisson[0], 1.0);
}

TEST(HistogramFit, SymmetricCounts) {
  const HistogramFit fit = fit_histogram_models({1, 1, 1, 1, 1, 1, 1, 1});
  EXPECT_DOUBLE_EQ(fit.gaussian_mean, 3.5);
}

TEST(HistogramFit, WeightedMoments) {
  const std::array<std::size_t, 8> counts{10, 20, 40, 20, 10, 0, 0, 0};
  const HistogramFit fit = fit_histogram_models(counts);
  double n = 0, mean = 0, var = 0;
  for (std::size_t k = 0; k < 8; ++k) {
    n += static_cast<double>(counts[k]);
    mean += static_cast<double>(k * counts[k]);
  }
  mean /= n;
  for (std::size_t k = 0; k < 8; ++k) var += static_cast<double>(counts[k]) * (k - mean) * (k - mean);
  var /= n;
  EXPECT_DOUBLE_EQ(fit.gaussian_mean, 2.0);
  EXPECT_DOUBLE_EQ(fit.gaussian_mean, mean);
  EXPECT_DOUBLE_EQ(fit.gaussian_std, std::sqrt(var));
  EXPECT_DOUBLE_EQ(fit.poisson_rate, 2.0);
  EXPECT_NEAR(fit.poisson[2], 2.0 * std::exp(-2.0), 1e-15);
}

TEST(HistogramFit, AllZeroIsInputError) {
  EXPECT_THROW(fit_histogram_models({0, 0, 0, 0, 0, 0, 0, 0}), InputError);
}
