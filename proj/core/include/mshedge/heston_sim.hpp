#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace mshedge {

/// Heston coefficients and initial state. Every rate is per trading day.
struct HestonParams {
  double mu = 0.0;       // physical drift
  double a = 0.05;       // mean-reversion speed
  double v_bar = 1e-4;   // long-run variance
  double eta = 1e-3;     // vol-of-vol
  double rho = -0.5;     // spot/variance correlation
  double s0 = 100.0;
  double v0 = 1e-4;

  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Closed sampling interval for each HestonParams field.
struct ParamRanges {
  Interval mu{-5e-3, 5e-3};
  Interval a{0.01, 0.1};
  Interval v_bar{2.5e-5, 4e-4};
  Interval eta{1e-4, 2e-3};
  Interval rho{-0.9, 0.0};
  Interval s0{100.0, 100.0};
  Interval v0{2.5e-5, 4e-4};

  void validate() const;
};

/// Draws each field uniformly from its interval; a pure function of seed.
HestonParams sample_params(const ParamRanges& ranges, std::uint64_t seed);

/// Daily samples of simulated price and variance paths, row-major
/// [n_paths x (n_days + 1)].
struct PathSet {
  HestonParams params;
  std::size_t n_paths = 0;
  std::size_t n_days = 0;
  std::size_t substeps = 0;
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> stream_ids;
  std::vector<double> s;
  std::vector<double> v;

  std::size_t width() const { return n_days + 1; }
  std::span<const double> s_row(std::size_t path) const { return {s.data() + path * width(), width()}; }
  std::span<const double> v_row(std::size_t path) const { return {v.data() + path * width(), width()}; }
};

/// One simulated path: `s` and `v` both have n_days + 1 entries.
struct SinglePath {
  std::vector<double> s;
  std::vector<double> v;
};

/// Second Brownian increment: rho * z1 + sqrt(1 - rho^2) * z_perp. At
/// rho = +-1 this is exactly +-z1.
inline double correlated_normal(double z1, double z_perp, double rho) {
  return rho * z1 + std::sqrt(std::max(0.0, 1.0 - rho * rho)) * z_perp;
}

/// Full-truncation Euler-Maruyama on (log S, V) with dt = 1/substeps days.
/// The Brownian increments come from stream `stream_id` of `master_seed`.
SinglePath simulate_path(const HestonParams& params, std::size_t n_days, std::size_t substeps,
                         std::uint64_t master_seed, std::uint64_t stream_id);

/// Simulates n_paths paths with stream ids 0..n_paths-1. Output is
/// bit-identical for any `threads` value (0 = hardware concurrency).
PathSet simulate_paths(const HestonParams& params, std::size_t n_days, std::size_t substeps,
                       std::size_t n_paths, std::uint64_t master_seed, std::size_t threads = 0);

/// CSV rows (path_id, day, s, v); `header_comment` lines are prefixed '#'.
std::string pathset_to_csv(const PathSet& paths, const std::string& header_comment = {});
/// JSON sidecar with params and seeds.
std::string pathset_sidecar_json(const PathSet& paths);
void write_pathset(const PathSet& paths, const std::filesystem::path& csv_path);

std::string to_json_string(const HestonParams& p);

}  // namespace mshedge
