#include "ivfts/arima.hpp"
#include "ivfts/eval.hpp"
#include "ivfts/fpca.hpp"
#include "ivfts/longrun.hpp"
#include "ivfts/mcs.hpp"
#include "ivfts/models.hpp"
#include "ivfts/random.hpp"
#include "ivfts/synth.hpp"
#include "ivfts/trading.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace ivfts;

namespace {

PanelSet synthetic_set(std::size_t days) {
  SynthOptions options;
  options.days = days;
  return synthesize(options, 11).panels;
}

void BM_StaticFpca(benchmark::State& state) {
  const PanelSet set = synthetic_set(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fit_static_fpca(set[0], ComponentRule::cpv(0.99)));
}
BENCHMARK(BM_StaticFpca)->Arg(250)->Arg(2000);

void BM_LongRunPlugin(benchmark::State& state) {
  const PanelSet set = synthetic_set(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(long_run_covariance(set[0], KernelWeights::flat_top(), BandwidthSpec::plugin()));
}
BENCHMARK(BM_LongRunPlugin)->Arg(250)->Arg(2000);

void BM_AutoArima(benchmark::State& state) {
  Rng rng(3);
  std::normal_distribution<double> z;
  ScoreSeries series{{}, "bench"};
  double a = 0;
  for (int i = 0; i < state.range(0); ++i) {
    a = 0.7 * a + z(rng);
    series.values.push_back(a);
  }
  for (auto _ : state) benchmark::DoNotOptimize(fit_auto_arima(series));
}
BENCHMARK(BM_AutoArima)->Arg(100)->Arg(500);

void BM_ModelFit(benchmark::State& state, const char* id) {
  const PanelSet set = synthetic_set(250);
  const ModelSpec spec = ModelSpec::parse(id);
  for (auto _ : state) benchmark::DoNotOptimize(fit_model(set, spec));
}
BENCHMARK_CAPTURE(BM_ModelFit, fts, "FTS-CPV");
BENCHMARK_CAPTURE(BM_ModelFit, dmfts, "DMFTS-CPV");
BENCHMARK_CAPTURE(BM_ModelFit, mlfts, "MLFTS-CPV");

void BM_Mcs(benchmark::State& state) {
  Rng rng(5);
  std::normal_distribution<double> z(1.0, 0.2);
  Matrix losses(500, state.range(0));
  for (Eigen::Index i = 0; i < losses.rows(); ++i)
    for (Eigen::Index j = 0; j < losses.cols(); ++j) losses(i, j) = z(rng);
  std::vector<std::string> ids;
  for (Eigen::Index j = 0; j < losses.cols(); ++j) ids.push_back("M" + std::to_string(j));
  McsConfig cfg;
  cfg.n_bootstrap = 1000;
  for (auto _ : state) benchmark::DoNotOptimize(model_confidence_set(losses, ids, cfg));
}
BENCHMARK(BM_Mcs)->Arg(5)->Arg(8);

void BM_GkStraddle(benchmark::State& state) {
  const MarketInputs in{1.1, 0.02, 0.005, 0.25, 0.1};
  for (auto _ : state) benchmark::DoNotOptimize(atm_straddle(in));
}
BENCHMARK(BM_GkStraddle);

}  // namespace

BENCHMARK_MAIN();
