#include "mshedge/hedge_engine.hpp"

#include <cmath>

#include "mshedge/errors.hpp"
#include "mshedge/text_io.hpp"

namespace mshedge {

std::size_t PeriodGrid::index_of(int tau) {
  for (std::size_t k = 0; k < kSize; ++k) {
    if (kTaus[k] == tau) return k;
  }
  throw ConfigError("hedging period " + std::to_string(tau) + " is not on the period grid");
}

void HedgeConfig::validate() const {
  PeriodGrid::index_of(tau);
  if (!(f >= 0.0)) throw ConfigError("hedge config: f must be >= 0");
  if (!(gamma > 0.0)) throw ConfigError("hedge config: gamma must be > 0");
  if (!std::isfinite(r)) throw ConfigError("hedge config: r must be finite");
}

std::vector<double> hold_between_rebalances(std::span<const double> daily, int tau) {
  if (tau < 1) throw ConfigError("tau must be >= 1");
  std::vector<double> out(daily.size());
  for (std::size_t t = 0; t < daily.size(); ++t) {
    out[t] = daily[(t / static_cast<std::size_t>(tau)) * static_cast<std::size_t>(tau)];
  }
  return out;
}

std::vector<double> fixed_frequency_deltas(const MarketSeries& series, const HestonParams& params,
                                           std::span<const double> v_path, int tau) {
  PeriodGrid::index_of(tau);
  const int horizon = series.horizon();
  if (v_path.size() != series.size()) throw InputError("fixed_frequency_deltas: v_path length mismatch");
  if (horizon % tau != 0) throw ConfigError("tau must divide the horizon");
  std::vector<double> out(series.size());
  double held = 0.0;
  for (int t = 0; t <= horizon; ++t) {
    if (t % tau == 0) {
      const auto i = static_cast<std::size_t>(t);
      held = heston_delta(params, series.s[i], v_path[i], series.spec, static_cast<double>(horizon - t));
    }
    out[static_cast<std::size_t>(t)] = held;
  }
  return out;
}

RewardBreakdown compute_reward(const MarketSeries& series, std::span<const double> deltas, const HedgeConfig& cfg) {
  cfg.validate();
  if (deltas.size() != series.size() || series.c.size() != series.s.size()) {
    throw InputError("compute_reward: series and delta lengths differ");
  }
  const int horizon = series.horizon();
  if (horizon < 1 || horizon % cfg.tau != 0) throw InputError("compute_reward: tau must divide the horizon");
  const std::size_t tau = static_cast<std::size_t>(cfg.tau);
  const std::size_t n_rebalances = static_cast<std::size_t>(horizon) / tau;
  const auto& s = series.s;
  const auto& c = series.c;

  RewardBreakdown out;
  out.pi0 = c[0] - deltas[0] * s[0];
  out.growth_term = out.pi0 * (std::exp(cfg.r * horizon) - cfg.f);

  out.per_rebalance_costs.resize(n_rebalances);
  for (std::size_t j = 1; j <= n_rebalances; ++j) {
    const std::size_t now = j * tau;
    const std::size_t prev = now - tau;
    const double price = cfg.cost_price_timing == CostPriceTiming::kPrevious ? s[prev] : s[now];
    const double cost = cfg.f * price * std::abs(deltas[now] - deltas[prev]);
    out.per_rebalance_costs[j - 1] = cost;
    out.cost_sum += cost;
  }

  // Deviation of the frozen-delta portfolio from its value at the last rebalance.
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < n_rebalances; ++i) {
    const std::size_t start = i * tau;
    const double held = deltas[start];
    const double anchor = c[start] - held * s[start];
    for (std::size_t j = 1; j <= tau; ++j) {
      const double d = anchor - (c[start + j] - held * s[start + j]);
      sum_sq += d * d;
    }
  }
  out.tracking_std = std::sqrt(sum_sq / static_cast<double>(n_rebalances * tau));
  out.reward = (out.growth_term - out.cost_sum) / (cfg.gamma + out.tracking_std);
  return out;
}

std::size_t argmax_reward(std::span<const double> rewards) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < rewards.size(); ++k) {
    if (rewards[k] > rewards[best]) best = k;
  }
  return best;
}

PeriodLabel label_from_daily_deltas(const MarketSeries& series, std::span<const double> daily_deltas,
                                    const HedgeConfig& cfg) {
  if (daily_deltas.size() != series.size()) throw InputError("label: delta length mismatch");
  PeriodLabel label;
  std::array<double, PeriodGrid::kSize> values{};
  for (std::size_t k = 0; k < PeriodGrid::kSize; ++k) {
    HedgeConfig c = cfg;
    c.tau = PeriodGrid::tau(k);
    auto held = hold_between_rebalances(daily_deltas, c.tau);
    label.rewards[k] = compute_reward(series, held, c);
    values[k] = label.rewards[k].reward;
  }
  label.label_index = argmax_reward(values);
  return label;
}

PeriodLabel label_optimal_period(const MarketSeries& series, const HestonParams& params,
                                 std::span<const double> v_path, const HedgeConfig& cfg) {
  if (series.size() != static_cast<std::size_t>(PeriodGrid::kHorizon) + 1) {
    throw InputError("label_optimal_period: needs a complete 31-day series");
  }
  auto daily = fixed_frequency_deltas(series, params, v_path, 1);
  return label_from_daily_deltas(series, daily, cfg);
}

std::string label_csv_header() {
  std::string h = "path_id,label_tau";
  for (int tau : PeriodGrid::kTaus) h += ",reward_" + std::to_string(tau);
  return h + "\n";
}

std::string label_csv_row(std::size_t path_id, const PeriodLabel& label) {
  std::string row = std::to_string(path_id) + ',' + std::to_string(label.label_tau());
  for (const auto& r : label.rewards) row += ',' + format_double(r.reward);
  return row + "\n";
}

}  // namespace mshedge
