#include <benchmark/benchmark.h>

#include "ccbf/bench.hpp"
#include "ccbf/filter.hpp"

namespace {

using namespace ccbf;

// One full control-cycle filter call at the default 400-obstacle subset.
void BM_FilterStep(benchmark::State& state) {
  const ObstacleMap map = bench_obstacles(static_cast<int>(state.range(0)), 7);
  const VehicleState s = bench_state();
  const FilterParams fp;
  RateThrustInput u;
  u.omega = Vec3(0.2, -0.4, 0.1);
  u.tau = -3.0;
  for (auto _ : state) {
    FilterStepOutput out = filter_step(s, map, u, fp);
    benchmark::DoNotOptimize(out.u_safe.tau);
  }
}
BENCHMARK(BM_FilterStep)->Arg(400);

void BM_SolveTwoRows(benchmark::State& state) {
  FilterProblem p;
  p.u_ref = Vec4(0.3, -0.2, 0.1, -4.0);
  p.A.resize(2, 4);
  p.A.row(0) = Vec4(1.2, -0.7, 0.0, -0.4).transpose();
  p.A.row(1) = Vec4(0, 0, 0, 1).transpose();
  p.b.resize(2);
  p.b << 1.5, -2.0;
  for (auto _ : state) {
    FilterResult r = solve(p);
    benchmark::DoNotOptimize(r.u_safe);
  }
}
BENCHMARK(BM_SolveTwoRows);

void BM_KNearest(benchmark::State& state) {
  const ObstacleMap map = bench_obstacles(static_cast<int>(state.range(0)), 3);
  const Vec3 x(0.5, 0.1, -1.0);
  for (auto _ : state) {
    ObstacleMap sel = k_nearest(map, x, 400);
    benchmark::DoNotOptimize(sel.points.data());
  }
}
BENCHMARK(BM_KNearest)->Arg(4000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
