#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ccbf/composite.hpp"

namespace ccbf {

enum class BenchMode { kAnalytic, kNumeric, kBoth };

struct BenchConfig {
  std::vector<int> obstacle_counts = {10, 100, 1000, 10000};
  int repetitions = 30;
  int warmup = 3;
  BenchMode mode = BenchMode::kBoth;
  int threads = 1;
  std::uint64_t seed = 42;
  // Calls per timed sample are max(1, batch_work / count).
  int batch_work = 20000;

  void validate() const;
};

struct BenchCell {
  int count = 0;
  std::string mode;  // "analytic" or "numeric"
  double median_ms = 0.0;
  double p10_ms = 0.0;
  double p90_ms = 0.0;
  std::vector<double> samples_ms;  // per-call time of every timed sample
};

struct BenchResult {
  std::vector<BenchCell> cells;

  const BenchCell* find(int count, const std::string& mode) const;
};

// Obstacles placed uniformly in a 20 m box; the timed region is chain
// evaluation plus composition (analytic) or the finite-difference route.
BenchResult run_bench(const BenchConfig& cfg);

// Linear-interpolated quantile, q in [0, 1].
double quantile(std::vector<double> values, double q);

// Least-squares slope of log(median) against log(count) for one mode.
double scaling_slope(const BenchResult& r, const std::string& mode,
                     const std::vector<int>& counts);

void report(const BenchResult& r, const std::filesystem::path& path);
void report(const BenchResult& r, std::ostream& out);
BenchResult read_report(const std::filesystem::path& path);

BenchMode bench_mode_from_string(const std::string& name);

// Representative mid-flight state used by the timing study.
VehicleState bench_state();
ObstacleMap bench_obstacles(int count, std::uint64_t seed);

}  // namespace ccbf
