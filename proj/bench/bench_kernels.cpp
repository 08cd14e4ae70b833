// OpenMP kernels against their serial references.

#include <benchmark/benchmark.h>

#include "etsm/config.hpp"
#include "etsm/observability.hpp"
#include "etsm/simulation.hpp"

using namespace etsm;

namespace {

// Upper bidiagonal plant with a dense output row; O stays well conditioned
// up to n = 12.
SimConfig chain_config(Eigen::Index n) {
  SimConfig cfg = reference_config();
  cfg.model.A = 0.5 * Matrix::Identity(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) cfg.model.A(i, i + 1) = 0.3;
  cfg.model.C = Eigen::RowVectorXd::LinSpaced(n, 1.0, 0.1);
  cfg.model.Q = Matrix::Identity(n, n);
  cfg.x0 = Vector::Zero(n);
  cfg.a = WeightVector::uniform(n);
  return cfg;
}

void BM_PatternTraces(benchmark::State& state) {
  const auto cfg = chain_config(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(pattern_traces(cfg.model, cfg.trigger, cfg.a));
  }
  state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << state.range(0)));
}

void BM_PatternTracesReference(benchmark::State& state) {
  const auto cfg = chain_config(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(pattern_traces_reference(cfg.model, cfg.trigger, cfg.a));
  }
  state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << state.range(0)));
}

void BM_MonteCarlo(benchmark::State& state) {
  const auto cfg = reference_config();
  for (auto _ : state) benchmark::DoNotOptimize(monte_carlo(cfg, state.range(0)));
}

void BM_MonteCarloSerial(benchmark::State& state) {
  const auto cfg = reference_config();
  for (auto _ : state) benchmark::DoNotOptimize(monte_carlo_serial(cfg, state.range(0)));
}

}  // namespace

BENCHMARK(BM_PatternTraces)->DenseRange(4, 12, 4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PatternTracesReference)->DenseRange(4, 12, 4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarlo)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarloSerial)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
