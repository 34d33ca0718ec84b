#include <benchmark/benchmark.h>

#include <swedge/bias.hpp>
#include <swedge/estimators.hpp>
#include <swedge/simulate.hpp>

using namespace swedge;

namespace {

SimulationConfig config(int T) {
  const auto l = build_layout(DesignKind::concurrent, T, 2);
  return {l, outcome_curve(OutcomeModel::B2, EffectRegime::small, T), default_period_effects(T),
          {0.15, 2.85, {}}, 30, {}, 1};
}

FitModel model_of(int64_t v) { return v == 0 ? FitModel::A : v == 1 ? FitModel::B : FitModel::C; }

}  // namespace

static void BM_RemlFit(benchmark::State& state) {
  const auto cfg = config(static_cast<int>(state.range(0)));
  const auto means = cluster_period_means(simulate(cfg, 0));
  ModelFitter fitter(cfg.layout, model_of(state.range(1)), means.n);
  for (auto _ : state) benchmark::DoNotOptimize(fitter.fit(means));
}
BENCHMARK(BM_RemlFit)->ArgsProduct({{5, 11}, {0, 1, 2}})->Unit(benchmark::kMicrosecond);

static void BM_BootstrapResample(benchmark::State& state) {
  const auto cfg = config(static_cast<int>(state.range(0)));
  const auto data = simulate(cfg, 0);
  CellMeans out;
  std::uint32_t b = 0;
  for (auto _ : state) {
    RandomStream rng(7, 0, ++b);
    resample_means(data, rng, out);
    benchmark::DoNotOptimize(out.mean.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(data.observations()));
}
BENCHMARK(BM_BootstrapResample)->Arg(5)->Arg(11)->Unit(benchmark::kMicrosecond);

static void BM_BootstrapRefit(benchmark::State& state) {
  const auto cfg = config(5);
  const auto data = simulate(cfg, 0);
  const auto model = model_of(state.range(0));
  ModelFitter fitter(cfg.layout, model, data.sizes().cast<double>());
  const auto ref = fitter.fit(cluster_period_means(data));
  CellMeans out;
  std::uint32_t b = 0;
  for (auto _ : state) {
    RandomStream rng(7, 0, ++b);
    resample_means(data, rng, out);
    benchmark::DoNotOptimize(fitter.fit(out, &ref.log_psi));
  }
}
BENCHMARK(BM_BootstrapRefit)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMicrosecond);

static void BM_HGeneral(benchmark::State& state) {
  const int T = static_cast<int>(state.range(0));
  const auto l = build_layout(DesignKind::factorial_augmented, T, 2);
  for (auto _ : state) benchmark::DoNotOptimize(H_general(l, 1.0 / T));
}
BENCHMARK(BM_HGeneral)->Arg(5)->Arg(11)->Arg(21);

static void BM_HConcurrentClosed(benchmark::State& state) {
  const int T = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(H_concurrent_closed(T, 2, 1.0 / T));
}
BENCHMARK(BM_HConcurrentClosed)->Arg(5)->Arg(11)->Arg(21);

BENCHMARK_MAIN();
