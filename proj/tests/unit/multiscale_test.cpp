#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "mshedge/errors.hpp"
#include "mshedge/multiscale.hpp"
#include "oracles.hpp"

using namespace mshedge;

namespace {

std::vector<std::array<double, 8>> rows_of(const WeightSchedule& w) { return {w.rows.begin(), w.rows.end()}; }

// Weights that drift from day to day, as a classifier's would.
WeightSchedule random_schedule(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  WeightSchedule w;
  w.provenance = "test";
  for (int t = 0; t <= 30; ++t) {
    ProbVector p;
    double sum = 0.0;
    for (double& x : p) sum += (x = u(rng));
    for (double& x : p) x /= sum;
    // hold some rows so not every day is a change
    w.rows.push_back(t % 4 == 1 ? w.rows.back() : p);
  }
  return w;
}

EnsembleSpec constant_ensemble(const ProbVector& p, std::vector<int> cutoffs) {
  EnsembleSpec e{ModelKind::kUniform, {}};
  for (int c : cutoffs) e.by_cutoff[c].push_back(ConstantModel{p});
  return e;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST(WeightSchedule, UniformModelGivesUniformRows) {
  const auto lp = fixture::seeded_path(0);
  const WeightSchedule w = weight_schedule(constant_ensemble(uniform_probs(), {5, 15}), lp.priced.series);
  ASSERT_EQ(w.rows.size(), 31u);
  for (const auto& r : w.rows) EXPECT_EQ(r, uniform_probs());
}

TEST(WeightSchedule, FixedPeriodIsConstantOneHot) {
  const WeightSchedule w = WeightSchedule::fixed_period(3, 31);
  EXPECT_EQ(w.provenance, "fixed-5");
  for (const auto& r : w.rows) EXPECT_EQ(r, one_hot(3));
}

TEST(WeightSchedule, NoModelsIsConfigError) {
  const auto lp = fixture::seeded_path(0);
  EXPECT_THROW(weight_schedule(EnsembleSpec{}, lp.priced.series), ConfigError);
}

TEST(WeightSchedule, ReproducibleAndCausal) {
  const auto lp = fixture::seeded_path(1);
  EnsembleSpec e{ModelKind::kCnn, {}};
  for (int c : {5, 10, 20}) e.by_cutoff[c] = {CnnModel::initialized(c), CnnModel::initialized(c + 100)};
  const WeightSchedule a = weight_schedule(e, lp.priced.series);
  const WeightSchedule b = weight_schedule(e, lp.priced.series);
  EXPECT_EQ(a.rows, b.rows);
  for (int t : {0, 3, 7, 12, 22}) {
    MarketSeries cut = lp.priced.series;
    for (std::size_t d = static_cast<std::size_t>(t) + 1; d < cut.size(); ++d) {
      cut.s[d] = 1.0;
      cut.c[d] = 0.0;
    }
    const WeightSchedule w = weight_schedule(e, cut);
    for (int d = 0; d <= t; ++d) EXPECT_EQ(w.rows[d], a.rows[d]) << "t=" << t << " d=" << d;
  }
}

TEST(Backtest, OneHotReproducesFixedFrequencyWealth) {
  for (std::size_t id : {0u, 5u}) {
    const auto lp = fixture::seeded_path(id, 8);
    const MarketSeries& m = lp.priced.series;
    HedgeConfig cfg;
    cfg.r = 2e-4;
    for (std::size_t k = 0; k < PeriodGrid::kSize; ++k) {
      const BacktestReport rep = multiscale_backtest(m, lp.priced.delta, WeightSchedule::fixed_period(k, 31), cfg);
      const auto want = oracle::fixed_frequency_wealth(m.s, m.c, lp.priced.delta, PeriodGrid::tau(k), cfg.f, cfg.r);
      for (std::size_t t = 0; t <= 30; ++t) EXPECT_NEAR(rep.wealth[t], want[t], 1e-12 * std::max(1.0, std::abs(want[t])));
    }
  }
}

TEST(Backtest, ParamsOverloadUsesDailyHestonDeltas) {
  const auto lp = fixture::seeded_path(2);
  const WeightSchedule w = WeightSchedule::constant(uniform_probs(), 31, "unif");
  HedgeConfig cfg;
  const BacktestReport a = multiscale_backtest(lp.priced.series, lp.params, lp.v, w, cfg);
  const BacktestReport b = multiscale_backtest(lp.priced.series, lp.priced.delta, w, cfg);
  EXPECT_EQ(a.wealth, b.wealth);
}

TEST(Backtest, FlatMarketWithoutCostKeepsWealth) {
  const MarketSeries m = fixture::flat_series(100.0, 4.0);
  std::vector<double> daily(31);
  for (int t = 0; t <= 30; ++t) daily[t] = 0.3 + 0.01 * t;
  HedgeConfig cfg;
  cfg.f = 0.0;
  const BacktestReport rep = multiscale_backtest(m, daily, random_schedule(3), cfg);
  for (double w : rep.wealth) EXPECT_NEAR(w, rep.wealth[0], 1e-12);
}

TEST(Backtest, MatchesDayLoopOracle) {
  const auto lp = fixture::seeded_path(3, 4);
  const MarketSeries& m = lp.priced.series;
  for (const WeightSchedule& w : {WeightSchedule::constant(uniform_probs(), 31, "unif"), random_schedule(9)}) {
    HedgeConfig cfg;
    cfg.r = 1e-4;
    const BacktestReport rep = multiscale_backtest(m, lp.priced.delta, w, cfg);
    const auto want = oracle::day_loop_backtest(m.s, m.c, lp.priced.delta, rows_of(w), cfg.f, cfg.r);
    for (std::size_t t = 0; t <= 30; ++t) {
      EXPECT_LE(rel_err(rep.wealth[t], want.wealth[t]), 1e-12);
      EXPECT_NEAR(rep.cash[t], want.cash[t], 1e-12 * std::max(1.0, std::abs(want.cash[t])));
      EXPECT_NEAR(rep.cumulative_cost[t], want.cost[t], 1e-12);
    }
  }
}

TEST(Backtest, SelfFinancingWithoutCosts) {
  const auto lp = fixture::seeded_path(4);
  const MarketSeries& m = lp.priced.series;
  HedgeConfig cfg;
  cfg.f = 0.0;
  const BacktestReport rep = multiscale_backtest(m, lp.priced.delta, random_schedule(4), cfg);
  for (std::size_t t = 1; t <= 30; ++t) {
    const double expected = (m.c[t] - m.c[t - 1]) - rep.delta[t - 1] * (m.s[t] - m.s[t - 1]);
    EXPECT_NEAR(rep.wealth[t] - rep.wealth[t - 1], expected, 1e-12);
  }
}

TEST(Backtest, HigherCostNeverRaisesFinalWealth) {
  const auto lp = fixture::seeded_path(6);
  const WeightSchedule w = random_schedule(6);
  double prev = std::numeric_limits<double>::infinity();
  for (double f : {0.0, 0.001, 0.01, 0.05}) {
    HedgeConfig cfg;
    cfg.f = f;
    const double w30 = multiscale_backtest(lp.priced.series, lp.priced.delta, w, cfg).wealth.back();
    EXPECT_LE(w30, prev);
    prev = w30;
  }
}

TEST(Backtest, LengthMismatchIsInputError) {
  const auto lp = fixture::seeded_path(0);
  HedgeConfig cfg;
  EXPECT_THROW(multiscale_backtest(lp.priced.series, lp.priced.delta, WeightSchedule::fixed_period(0, 30), cfg),
               InputError);
}

TEST(GeneralizedReward, ReducesToFixedFrequencyReward) {
  const auto lp = fixture::seeded_path(7);
  const MarketSeries& m = lp.priced.series;
  for (std::size_t k = 0; k < PeriodGrid::kSize; ++k) {
    for (auto timing : {CostPriceTiming::kPrevious, CostPriceTiming::kCurrent}) {
      HedgeConfig cfg;
      cfg.tau = PeriodGrid::tau(k);
      cfg.r = 1e-4;
      cfg.cost_price_timing = timing;
      const BacktestReport rep = multiscale_backtest(m, lp.priced.delta, WeightSchedule::fixed_period(k, 31), cfg);
      const RewardBreakdown got = generalized_reward(rep, m, cfg);
      const RewardBreakdown want = compute_reward(m, hold_between_rebalances(lp.priced.delta, cfg.tau), cfg);
      EXPECT_NEAR(got.reward, want.reward, 1e-12 * std::abs(want.reward));
      EXPECT_NEAR(got.tracking_std, want.tracking_std, 1e-12 * std::max(1.0, want.tracking_std));
      EXPECT_NEAR(got.cost_sum, want.cost_sum, 1e-12);
    }
  }
}

TEST(GeneralizedReward, CostFreeNumeratorIsInitialPortfolio) {
  const auto lp = fixture::seeded_path(8);
  HedgeConfig cfg;
  cfg.f = 0.0;
  const BacktestReport rep = multiscale_backtest(lp.priced.series, lp.priced.delta, random_schedule(8), cfg);
  EXPECT_EQ(generalized_reward(rep, lp.priced.series, cfg).numerator(), rep.pi0);
}

TEST(GeneralizedReward, MatchesBruteForceOnDynamicSchedule) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto lp = fixture::seeded_path(seed, 30);
    const MarketSeries& m = lp.priced.series;
    const WeightSchedule w = random_schedule(seed + 50);
    HedgeConfig cfg;
    cfg.r = 1e-4;
    const BacktestReport rep = multiscale_backtest(m, lp.priced.delta, w, cfg);
    const auto want = oracle::direct_generalized_reward(m.s, m.c, rep.delta, oracle::rebalance_flags(rows_of(w)),
                                                        cfg.f, cfg.gamma, cfg.r);
    EXPECT_LE(rel_err(generalized_reward(rep, m, cfg).reward, want.reward), 1e-12);
  }
}

TEST(StrategyMetrics, RiskNeutralWealth) {
  const MarketSeries m = fixture::flat_series(100.0, 5.0);
  BacktestReport rep;
  rep.pi0 = -20.0;
  for (int t = 0; t <= 30; ++t) {
    rep.wealth.push_back(rep.pi0 * std::exp(1e-3 * t));
    rep.reference.push_back(rep.pi0 * std::exp(1e-3 * t));
  }
  const StrategyMetrics sm = strategy_metrics(rep, m);
  EXPECT_DOUBLE_EQ(sm.final_pct, 100.0);
  EXPECT_EQ(sm.std_pct, 0.0);
}

TEST(StrategyMetrics, DoublingWealthOnFlatStock) {
  const MarketSeries m = fixture::flat_series(100.0, 5.0);
  BacktestReport rep;
  rep.pi0 = 10.0;
  for (int t = 0; t <= 30; ++t) {
    rep.wealth.push_back(10.0 + 10.0 * t / 30.0);
    rep.reference.push_back(10.0);
  }
  EXPECT_DOUBLE_EQ(strategy_metrics(rep, m).under_pct, 100.0);
}

TEST(StrategyMetrics, HandComputedThreeDayToy) {
  MarketSeries m;
  m.s = {100.0, 102.0, 99.0, 104.0};
  m.c = {5.0, 6.0, 4.0, 8.0};
  BacktestReport rep;
  rep.pi0 = -50.0;
  rep.wealth = {-50.0, -49.0, -51.0, -48.0};
  rep.reference = {-50.0, -50.0, -50.0, -50.0};
  const StrategyMetrics sm = strategy_metrics(rep, m);
  // differences 0, 1, -1, 2: mean 0.5, population variance 1.25
  EXPECT_DOUBLE_EQ(sm.final_pct, 96.0);
  EXPECT_DOUBLE_EQ(sm.std_pct, 100.0 * std::sqrt(1.25) / 50.0);
  EXPECT_DOUBLE_EQ(sm.under_pct, 100.0 * ((-48.0 / -50.0 - 1.0) - 0.04));
}

TEST(StrategyMetrics, ZeroInitialPortfolioIsError) {
  const MarketSeries m = fixture::flat_series(100.0, 5.0);
  BacktestReport rep;
  rep.wealth.assign(31, 0.0);
  rep.reference.assign(31, 0.0);
  EXPECT_THROW(strategy_metrics(rep, m), InputError);
}

TEST(GammaSweep, SingleStrategyAllZeroAndNeverPositive) {
  const auto lp = fixture::seeded_path(9);
  HedgeConfig cfg;
  const std::vector<double> gammas{0.1, 0.5, 1.0, 1.5, 3.0, 5.0};
  const std::vector<NamedSchedule> one{{"5", WeightSchedule::fixed_period(3, 31)}};
  for (const auto& e : gamma_sweep(lp.priced.series, lp.priced.delta, one, cfg, gammas)) EXPECT_EQ(e.reward_gap, 0.0);

  std::vector<NamedSchedule> all;
  for (std::size_t k = 0; k < PeriodGrid::kSize; ++k) {
    all.push_back({std::to_string(PeriodGrid::tau(k)), WeightSchedule::fixed_period(k, 31)});
  }
  all.push_back({"mix", random_schedule(1)});
  const auto entries = gamma_sweep(lp.priced.series, lp.priced.delta, all, cfg, gammas);
  ASSERT_EQ(entries.size(), gammas.size() * all.size());
  for (std::size_t g = 0; g < gammas.size(); ++g) {
    int zeros = 0;
    for (std::size_t i = 0; i < all.size(); ++i) {
      const auto& e = entries[g * all.size() + i];
      EXPECT_LE(e.reward_gap, 0.0);
      EXPECT_EQ(e.gamma, gammas[g]);
      zeros += e.reward_gap == 0.0;
    }
    EXPECT_GE(zeros, 1);
  }
}

TEST(Reports, CsvLayouts) {
  const auto lp = fixture::seeded_path(0);
  HedgeConfig cfg;
  const WeightSchedule w = WeightSchedule::fixed_period(0, 31);
  const BacktestReport rep = multiscale_backtest(lp.priced.series, lp.priced.delta, w, cfg);
  EXPECT_EQ(report_csv(rep).substr(0, 29), "day,W,B,delta,cost,reference\n");
  EXPECT_EQ(weights_csv(w, "h").substr(0, 4), "# h\n");
  std::vector<std::pair<std::string, StrategyMetrics>> rows;
  for (const auto& name : strategy_names()) rows.emplace_back(name, strategy_metrics(rep, lp.priced.series));
  const std::string metrics = metrics_csv(rows);
  EXPECT_EQ(metrics.substr(0, 36), "strategy,final_pct,std_pct,under_pct");
  EXPECT_EQ(std::count(metrics.begin(), metrics.end(), '\n'), 14);
  EXPECT_EQ(strategy_names().size(), 13u);
}
