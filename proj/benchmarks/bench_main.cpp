#include <benchmark/benchmark.h>

#include <random>

#include "mshedge/cnn.hpp"
#include "mshedge/dataset.hpp"
#include "mshedge/hedge_engine.hpp"
#include "mshedge/heston_sim.hpp"
#include "mshedge/multiscale.hpp"
#include "mshedge/pricer.hpp"

using namespace mshedge;

namespace {

HestonParams bench_params() {
  HestonParams p;
  p.a = 0.05;
  p.v_bar = 1.5e-4;
  p.eta = 1e-3;
  p.rho = -0.6;
  p.v0 = 2e-4;
  return p;
}

const LabeledPath& bench_path() {
  static const LabeledPath lp = generate_labeled_path(DatasetConfig{}, 3);
  return lp;
}

std::vector<Sample> bench_batch(std::size_t n) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.8, 1.2);
  std::vector<Sample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].features.cutoff_day = 30;
    for (std::size_t d = 0; d < 30; ++d) {
      out[i].features.values[d] = u(rng);
      out[i].features.values[30 + d] = 0.1 * u(rng);
      out[i].features.mask[d] = 1.0;
    }
    out[i].label_index = i % PeriodGrid::kSize;
  }
  return out;
}

}  // namespace

static void BM_HestonPrice(benchmark::State& state) {
  const HestonParams p = bench_params();
  const CallSpec spec = CallSpec::at_moneyness(100.0, 1.1);
  const double tau = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(heston_call_price(p, 100.0, p.v0, spec, tau));
}
BENCHMARK(BM_HestonPrice)->Arg(1)->Arg(10)->Arg(30);

static void BM_PricePath(benchmark::State& state) {
  const LabeledPath& lp = bench_path();
  for (auto _ : state) {
    benchmark::DoNotOptimize(price_path_with_deltas(lp.priced.series.s, lp.v, lp.params, lp.priced.series.spec));
  }
}
BENCHMARK(BM_PricePath)->Unit(benchmark::kMillisecond);

static void BM_SimulatePaths(benchmark::State& state) {
  const HestonParams p = bench_params();
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(simulate_paths(p, 30, 8, n, 42, 1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulatePaths)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

static void BM_LabelPath(benchmark::State& state) {
  const LabeledPath& lp = bench_path();
  const HedgeConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(label_from_daily_deltas(lp.priced.series, lp.priced.delta, cfg));
}
BENCHMARK(BM_LabelPath);

static void BM_CnnForward(benchmark::State& state) {
  const CnnModel m = CnnModel::initialized(1);
  const auto batch = bench_batch(1);
  for (auto _ : state) benchmark::DoNotOptimize(cnn_forward(m, batch[0].features));
}
BENCHMARK(BM_CnnForward);

static void BM_CnnGradient(benchmark::State& state) {
  const CnnModel m = CnnModel::initialized(1);
  const auto batch = bench_batch(static_cast<std::size_t>(state.range(0)));
  std::vector<double> grad(m.params.size());
  for (auto _ : state) benchmark::DoNotOptimize(cnn_loss_and_gradient(m, batch, grad));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CnnGradient)->Arg(32);

static void BM_Backtest(benchmark::State& state) {
  const LabeledPath& lp = bench_path();
  const WeightSchedule w = WeightSchedule::constant(uniform_probs(), 31, "unif");
  const HedgeConfig cfg;
  for (auto _ : state) {
    const BacktestReport rep = multiscale_backtest(lp.priced.series, lp.priced.delta, w, cfg);
    benchmark::DoNotOptimize(generalized_reward(rep, lp.priced.series, cfg));
  }
}
BENCHMARK(BM_Backtest);
BENCHMARK_MAIN();
