#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "mshedge/dataset.hpp"

namespace fixture {

/// A fresh, empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("mshedge_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Labeled synthetic path `id` under the default ranges.
inline mshedge::LabeledPath seeded_path(std::size_t id, std::uint64_t seed = 42) {
  mshedge::DatasetConfig cfg;
  cfg.master_seed = seed;
  return mshedge::generate_labeled_path(cfg, id);
}

/// Flat market: S and C constant for 31 days.
inline mshedge::MarketSeries flat_series(double s, double c) {
  mshedge::MarketSeries m;
  m.s.assign(31, s);
  m.c.assign(31, c);
  m.spec = mshedge::CallSpec::at_moneyness(s, 1.0);
  m.source = mshedge::SeriesSource::kReal;  // terminal value is not the payoff
  return m;
}

}  // namespace fixture
