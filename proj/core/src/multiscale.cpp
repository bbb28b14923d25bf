#include "mshedge/multiscale.hpp"

#include <algorithm>
#include <cmath>

#include "mshedge/errors.hpp"
#include "mshedge/text_io.hpp"

namespace mshedge {

namespace {

constexpr double kTradeEps = 1e-12;

std::string comment_line(const std::string& c) { return c.empty() ? std::string() : "# " + c + "\n"; }

}  // namespace

WeightSchedule WeightSchedule::constant(const ProbVector& w, std::size_t n_rows, std::string provenance) {
  WeightSchedule s;
  s.rows.assign(n_rows, w);
  s.provenance = std::move(provenance);
  return s;
}

WeightSchedule WeightSchedule::fixed_period(std::size_t k, std::size_t n_rows) {
  return constant(one_hot(k), n_rows, "fixed-" + std::to_string(PeriodGrid::tau(k)));
}

void WeightSchedule::validate() const {
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (!is_valid(rows[t])) throw InputError("weight schedule row " + std::to_string(t) + " is not a distribution");
  }
}

WeightSchedule weight_schedule(const EnsembleSpec& ensemble, const MarketSeries& series) {
  if (ensemble.empty()) throw ConfigError("weight_schedule: no trained models");
  std::vector<int> cutoffs;
  for (const auto& [c, members] : ensemble.by_cutoff) {
    if (!members.empty()) cutoffs.push_back(c);
  }
  WeightSchedule out;
  out.provenance = std::string(to_string(ensemble.kind));
  out.rows.resize(series.size());
  const int smallest = cutoffs.front();
  for (int t = 0; t <= series.horizon(); ++t) {
    ProbVector row;
    if (t < smallest) {
      row = ensemble.predict(smallest, featurize(series, t + 1));
    } else {
      const int c = *std::prev(std::upper_bound(cutoffs.begin(), cutoffs.end(), t));
      row = ensemble.predict(c, featurize(series, c));
    }
    out.rows[static_cast<std::size_t>(t)] = row;
  }
  return out;
}

BacktestReport multiscale_backtest(const MarketSeries& series, std::span<const double> daily_deltas,
                                   const WeightSchedule& schedule, const HedgeConfig& cfg) {
  const std::size_t n = series.size();
  if (daily_deltas.size() != n || schedule.rows.size() != n || series.c.size() != n) {
    throw InputError("multiscale_backtest: series, deltas and schedule lengths differ");
  }
  const int horizon = series.horizon();
  if (horizon < 1) throw InputError("multiscale_backtest: series too short");
  schedule.validate();

  std::array<std::vector<double>, PeriodGrid::kSize> tracks;
  for (std::size_t k = 0; k < PeriodGrid::kSize; ++k) {
    if (horizon % PeriodGrid::tau(k) != 0) throw InputError("multiscale_backtest: horizon not divisible by grid");
    tracks[k] = hold_between_rebalances(daily_deltas, PeriodGrid::tau(k));
  }

  BacktestReport rep;
  rep.delta.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    double agg = 0.0;
    for (std::size_t k = 0; k < PeriodGrid::kSize; ++k) agg += schedule.rows[t][k] * tracks[k][t];
    rep.delta[t] = agg;
  }

  const auto& s = series.s;
  const auto& c = series.c;
  rep.pi0 = c[0] - rep.delta[0] * s[0];
  rep.wealth.resize(n);
  rep.cash.resize(n);
  rep.cumulative_cost.resize(n);
  rep.reference.resize(n);
  rep.cash[0] = 0.0;
  rep.cumulative_cost[0] = 0.0;
  rep.wealth[0] = rep.pi0;
  rep.reference[0] = rep.pi0;
  const double growth = std::exp(cfg.r);
  for (std::size_t t = 1; t < n; ++t) {
    const double change = rep.delta[t] - rep.delta[t - 1];
    const double cost = cfg.f * s[t] * std::abs(change);
    rep.cash[t] = rep.cash[t - 1] * growth + s[t] * change - cost;
    rep.cumulative_cost[t] = rep.cumulative_cost[t - 1] + cost;
    rep.wealth[t] = c[t] - rep.delta[t] * s[t] + rep.cash[t];
    rep.reference[t] = rep.pi0 * std::exp(cfg.r * static_cast<double>(t));
    if (std::abs(change) > kTradeEps) rep.trade_days.push_back(static_cast<int>(t));

    bool rebalance = schedule.rows[t] != schedule.rows[t - 1];
    for (std::size_t k = 0; k < PeriodGrid::kSize && !rebalance; ++k) {
      const bool weighted = schedule.rows[t][k] > 0.0 || schedule.rows[t - 1][k] > 0.0;
      rebalance = weighted && t % static_cast<std::size_t>(PeriodGrid::tau(k)) == 0;
    }
    if (rebalance) rep.rebalance_days.push_back(static_cast<int>(t));
  }
  return rep;
}

BacktestReport multiscale_backtest(const MarketSeries& series, const HestonParams& params,
                                   std::span<const double> v_path, const WeightSchedule& schedule,
                                   const HedgeConfig& cfg) {
  const auto daily = fixed_frequency_deltas(series, params, v_path, 1);
  return multiscale_backtest(series, daily, schedule, cfg);
}

RewardBreakdown generalized_reward(const BacktestReport& report, const MarketSeries& series, const HedgeConfig& cfg) {
  if (!(cfg.gamma > 0.0) || !(cfg.f >= 0.0)) throw ConfigError("generalized_reward: needs gamma > 0 and f >= 0");
  const std::size_t n = series.size();
  if (report.delta.size() != n || report.wealth.size() != n) {
    throw InputError("generalized_reward: report does not match the series");
  }
  const int horizon = series.horizon();
  const auto& s = series.s;
  const auto& c = series.c;
  const auto& delta = report.delta;

  RewardBreakdown out;
  out.pi0 = c[0] - delta[0] * s[0];
  out.growth_term = out.pi0 * (std::exp(cfg.r * horizon) - cfg.f);

  std::size_t prev = 0;
  for (int day : report.rebalance_days) {
    const auto now = static_cast<std::size_t>(day);
    const double price = cfg.cost_price_timing == CostPriceTiming::kPrevious ? s[prev] : s[now];
    const double cost = cfg.f * price * std::abs(delta[now] - delta[prev]);
    out.per_rebalance_costs.push_back(cost);
    out.cost_sum += cost;
    prev = now;
  }

  double sum_sq = 0.0;
  std::size_t ref = 0;
  auto next = report.rebalance_days.begin();
  for (std::size_t t = 1; t < n; ++t) {
    // ref = last rebalance day <= t - 1
    while (next != report.rebalance_days.end() && static_cast<std::size_t>(*next) <= t - 1) {
      ref = static_cast<std::size_t>(*next);
      ++next;
    }
    const double held = delta[ref];
    const double d = (c[ref] - held * s[ref]) - (c[t] - held * s[t]);
    sum_sq += d * d;
  }
  out.tracking_std = std::sqrt(sum_sq / static_cast<double>(horizon));
  out.reward = (out.growth_term - out.cost_sum) / (cfg.gamma + out.tracking_std);
  return out;
}

StrategyMetrics strategy_metrics(const BacktestReport& report, const MarketSeries& series) {
  const std::size_t n = report.wealth.size();
  if (n < 2 || report.reference.size() != n || series.size() != n) {
    throw InputError("strategy_metrics: incomplete report");
  }
  if (report.pi0 == 0.0) throw InputError("strategy_metrics: undefined for a zero initial portfolio");
  StrategyMetrics m;
  m.final_pct = 100.0 * report.wealth.back() / report.reference.back();
  double mean = 0.0;
  for (std::size_t t = 0; t < n; ++t) mean += report.wealth[t] - report.reference[t];
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double d = report.wealth[t] - report.reference[t] - mean;
    var += d * d;
  }
  m.std_pct = 100.0 * std::sqrt(var / static_cast<double>(n)) / std::abs(report.pi0);
  m.under_pct = 100.0 * ((report.wealth.back() / report.wealth.front() - 1.0) - (series.s.back() / series.s.front() - 1.0));
  return m;
}

std::vector<SweepEntry> gamma_sweep(const MarketSeries& series, std::span<const double> daily_deltas,
                                    std::span<const NamedSchedule> schedules, const HedgeConfig& cfg,
                                    std::span<const double> gammas) {
  std::vector<BacktestReport> reports;
  reports.reserve(schedules.size());
  for (const auto& ns : schedules) reports.push_back(multiscale_backtest(series, daily_deltas, ns.schedule, cfg));

  std::vector<SweepEntry> out;
  std::vector<double> rewards(schedules.size());
  for (double gamma : gammas) {
    HedgeConfig g = cfg;
    g.gamma = gamma;
    for (std::size_t i = 0; i < schedules.size(); ++i) rewards[i] = generalized_reward(reports[i], series, g).reward;
    const double best = *std::max_element(rewards.begin(), rewards.end());
    for (std::size_t i = 0; i < schedules.size(); ++i) {
      out.push_back(SweepEntry{gamma, schedules[i].name, rewards[i] - best});
    }
  }
  return out;
}

std::vector<std::string> strategy_names() {
  std::vector<std::string> names{"cnn", "forest", "linear", "bayes", "unif"};
  for (int tau : PeriodGrid::kTaus) names.push_back(std::to_string(tau));
  return names;
}

std::string report_csv(const BacktestReport& report, const std::string& header_comment) {
  std::string out = comment_line(header_comment) + "day,W,B,delta,cost,reference\n";
  for (std::size_t t = 0; t < report.wealth.size(); ++t) {
    out += std::to_string(t) + ',' + format_double(report.wealth[t]) + ',' + format_double(report.cash[t]) + ',' +
           format_double(report.delta[t]) + ',' + format_double(report.cumulative_cost[t]) + ',' +
           format_double(report.reference[t]) + '\n';
  }
  return out;
}

std::string weights_csv(const WeightSchedule& schedule, const std::string& header_comment) {
  std::string out = comment_line(header_comment) + "day";
  for (int tau : PeriodGrid::kTaus) out += ",w_" + std::to_string(tau);
  out += '\n';
  for (std::size_t t = 0; t < schedule.rows.size(); ++t) {
    out += std::to_string(t) + ',' + join_doubles(schedule.rows[t]) + '\n';
  }
  return out;
}

std::string metrics_csv(std::span<const std::pair<std::string, StrategyMetrics>> rows,
                        const std::string& header_comment) {
  std::string out = comment_line(header_comment) + "strategy,final_pct,std_pct,under_pct\n";
  for (const auto& [name, m] : rows) {
    out += name + ',' + format_double(m.final_pct) + ',' + format_double(m.std_pct) + ',' +
           format_double(m.under_pct) + '\n';
  }
  return out;
}

std::string sweep_csv(std::span<const SweepEntry> entries, const std::string& header_comment) {
  std::string out = comment_line(header_comment) + "gamma,strategy,reward_gap\n";
  for (const auto& e : entries) {
    out += format_double(e.gamma) + ',' + e.strategy + ',' + format_double(e.reward_gap) + '\n';
  }
  return out;
}

}  // namespace mshedge
