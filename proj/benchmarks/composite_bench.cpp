#include <benchmark/benchmark.h>

#include "ccbf/bench.hpp"
#include "ccbf/composite.hpp"

namespace {

using namespace ccbf;

void BM_ComposeAnalytic(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  const ObstacleMap map = bench_obstacles(n, 42);
  const VehicleState s = bench_state();
  const ChainParams chain;
  const CompositeParams cp;
  const VehicleParams vp;
  for (auto _ : state) {
    BarrierEvaluation e = evaluate_composite(s, map, chain, cp, vp);
    benchmark::DoNotOptimize(e.lf_h1);
  }
  state.SetComplexityN(n);
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_ComposeAnalytic)->RangeMultiplier(10)->Range(10, 10000)->Complexity(benchmark::oN);

void BM_ComposeNumeric(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  const ObstacleMap map = bench_obstacles(n, 42);
  const VehicleState s = bench_state();
  const ChainParams chain;
  const CompositeParams cp;
  const VehicleParams vp;
  for (auto _ : state) {
    NumericLieDerivatives d = compose_numeric(map, s, cp, chain, vp);
    benchmark::DoNotOptimize(d.lf_h1);
  }
  state.SetComplexityN(n);
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_ComposeNumeric)->RangeMultiplier(10)->Range(10, 10000)->Complexity(benchmark::oN);

// Chain evaluation alone, to see how much of the analytic path is the
// per-obstacle algebra versus the reduction.
void BM_ChainsOnly(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  const ObstacleMap map = bench_obstacles(n, 42);
  const VehicleState s = bench_state();
  for (auto _ : state) {
    auto chains = evaluate_chains(s, map, ChainParams{}, VehicleParams{});
    benchmark::DoNotOptimize(chains.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_ChainsOnly)->Arg(400)->Arg(10000);

void BM_ComposeThreads(benchmark::State& state) {
  const ObstacleMap map = bench_obstacles(10000, 42);
  const VehicleState s = bench_state();
  const auto threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    BarrierEvaluation e =
        evaluate_composite(s, map, ChainParams{}, CompositeParams{}, VehicleParams{}, threads);
    benchmark::DoNotOptimize(e.h1);
  }
}
BENCHMARK(BM_ComposeThreads)->Arg(1)->Arg(2)->Arg(4)->UseRealTime();

}  // namespace
