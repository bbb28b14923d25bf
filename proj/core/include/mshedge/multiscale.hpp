#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mshedge/classifier.hpp"
#include "mshedge/hedge_engine.hpp"
#include "mshedge/pricer.hpp"
#include "mshedge/prob_vector.hpp"

namespace mshedge {

/// Daily mixing weights over the eight fixed-frequency hedges: rows[t] is
/// used on day t.
struct WeightSchedule {
  std::vector<ProbVector> rows;
  std::string provenance;  // cnn | forest | linear | bayes | unif | fixed-<tau>

  static WeightSchedule constant(const ProbVector& w, std::size_t n_rows, std::string provenance);
  /// One-hot on the period with grid index k.
  static WeightSchedule fixed_period(std::size_t k, std::size_t n_rows);
  void validate() const;
};

/// Row t comes from the models of the largest cutoff <= t applied to the
/// series observed up to that cutoff. Rows before the smallest cutoff use
/// the smallest-cutoff models on days 0..t. No row reads a day after t.
WeightSchedule weight_schedule(const EnsembleSpec& ensemble, const MarketSeries& series);

/// Day-by-day record of the mixed hedge. wealth = c - delta * s + cash.
struct BacktestReport {
  double pi0 = 0.0;
  std::vector<double> wealth;
  std::vector<double> cash;
  std::vector<double> delta;            // aggregate hedge ratio
  std::vector<double> cumulative_cost;
  std::vector<double> reference;        // pi0 * e^{r t}
  std::vector<int> trade_days;          // days the aggregate delta moved by > 1e-12
  std::vector<int> rebalance_days;      // days some weighted track refreshes or the weights change
};

/// Eight virtual fixed-frequency tracks built from the daily deltas, mixed
/// with the schedule's weights; self-financing cash account accruing at
/// cfg.r, trading costs f * s_t * |change in delta|.
BacktestReport multiscale_backtest(const MarketSeries& series, std::span<const double> daily_deltas,
                                   const WeightSchedule& schedule, const HedgeConfig& cfg);
BacktestReport multiscale_backtest(const MarketSeries& series, const HestonParams& params,
                                   std::span<const double> v_path, const WeightSchedule& schedule,
                                   const HedgeConfig& cfg);

/// The fixed-frequency reward extended to a time-varying hedge: deviations
/// and cost prices are taken against the last rebalance day. Equals
/// compute_reward exactly for a constant one-hot schedule.
RewardBreakdown generalized_reward(const BacktestReport& report, const MarketSeries& series, const HedgeConfig& cfg);

struct StrategyMetrics {
  double final_pct = 0.0;  // final wealth relative to the risk-neutral portfolio
  double std_pct = 0.0;    // std of wealth minus the risk-neutral portfolio, relative to |pi0|
  double under_pct = 0.0;  // wealth change minus underlying change
};

/// Throws InputError when pi0 == 0.
StrategyMetrics strategy_metrics(const BacktestReport& report, const MarketSeries& series);

struct NamedSchedule {
  std::string name;
  WeightSchedule schedule;
};

struct SweepEntry {
  double gamma = 0.0;
  std::string strategy;
  double reward_gap = 0.0;  // reward minus the best reward at this gamma (<= 0)
};

/// For each gamma, generalized rewards of all strategies minus their max.
std::vector<SweepEntry> gamma_sweep(const MarketSeries& series, std::span<const double> daily_deltas,
                                    std::span<const NamedSchedule> schedules, const HedgeConfig& cfg,
                                    std::span<const double> gammas);

/// The 13 strategy names in report order: cnn, forest, linear, bayes, unif,
/// then the fixed periods "1" ... "30".
std::vector<std::string> strategy_names();

std::string report_csv(const BacktestReport& report, const std::string& header_comment = {});
std::string weights_csv(const WeightSchedule& schedule, const std::string& header_comment = {});
std::string metrics_csv(std::span<const std::pair<std::string, StrategyMetrics>> rows,
                        const std::string& header_comment = {});
std::string sweep_csv(std::span<const SweepEntry> entries, const std::string& header_comment = {});

}  // namespace mshedge
