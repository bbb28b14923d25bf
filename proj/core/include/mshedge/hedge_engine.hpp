#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mshedge/pricer.hpp"

namespace mshedge {

/// The admissible rebalancing periods: the divisors of the 30-day horizon.
struct PeriodGrid {
  static constexpr std::size_t kSize = 8;
  static constexpr std::array<int, kSize> kTaus{1, 2, 3, 5, 6, 10, 15, 30};
  static constexpr int kHorizon = 30;

  /// Index of tau in kTaus; throws ConfigError if tau is not on the grid.
  static std::size_t index_of(int tau);
  static constexpr int tau(std::size_t index) { return kTaus[index]; }
};

/// Which stock price the transaction cost of a rebalance is charged at.
enum class CostPriceTiming {
  kPrevious,  // price at the previous rebalance (the literal reward formula)
  kCurrent,   // price on the day of the trade
};

struct HedgeConfig {
  int tau = 1;
  double f = 0.01;      // proportional cost fraction
  double gamma = 1.5;   // risk-aversion offset
  double r = 0.0;       // rate per trading day
  CostPriceTiming cost_price_timing = CostPriceTiming::kPrevious;

  void validate() const;
};

/// Components of the reward
///   (pi0 (e^{r H} - f) - cost_sum) / (gamma + tracking_std)
/// for one hedging strategy over horizon H.
struct RewardBreakdown {
  double pi0 = 0.0;
  double growth_term = 0.0;
  double cost_sum = 0.0;
  double tracking_std = 0.0;
  double reward = 0.0;
  std::vector<double> per_rebalance_costs;

  double numerator() const { return growth_term - cost_sum; }
};

struct PeriodLabel {
  std::size_t label_index = 0;
  std::array<RewardBreakdown, PeriodGrid::kSize> rewards;

  int label_tau() const { return PeriodGrid::tau(label_index); }
};

/// Holds the daily delta fixed between multiples of tau:
/// out[t] = daily[tau * floor(t / tau)]. daily[horizon] is already the
/// exercise indicator, so the last entry is too.
std::vector<double> hold_between_rebalances(std::span<const double> daily, int tau);

/// Heston deltas refreshed only every tau days along the series.
/// `v_path` is the variance path the series was priced on.
std::vector<double> fixed_frequency_deltas(const MarketSeries& series, const HestonParams& params,
                                           std::span<const double> v_path, int tau);

/// Scores one fixed-frequency strategy. `deltas` must be piecewise constant
/// on [j*tau, (j+1)*tau) as produced by fixed_frequency_deltas.
RewardBreakdown compute_reward(const MarketSeries& series, std::span<const double> deltas, const HedgeConfig& cfg);

/// Index of the largest reward, ties going to the smallest tau.
std::size_t argmax_reward(std::span<const double> rewards);

/// Rewards for all eight periods from precomputed daily deltas. `cfg.tau`
/// is ignored.
PeriodLabel label_from_daily_deltas(const MarketSeries& series, std::span<const double> daily_deltas,
                                    const HedgeConfig& cfg);

PeriodLabel label_optimal_period(const MarketSeries& series, const HestonParams& params,
                                 std::span<const double> v_path, const HedgeConfig& cfg);

/// One row of a label file: path_id, label_tau, reward_1 ... reward_30.
std::string label_csv_header();
std::string label_csv_row(std::size_t path_id, const PeriodLabel& label);

}  // namespace mshedge
