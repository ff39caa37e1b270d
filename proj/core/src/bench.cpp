#include "ccbf/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace ccbf {

void BenchConfig::validate() const {
  if (obstacle_counts.empty()) throw std::invalid_argument("bench needs obstacle counts");
  for (int c : obstacle_counts) {
    if (c <= 0) throw std::invalid_argument("obstacle counts must be positive");
  }
  if (repetitions < 10) throw std::invalid_argument("bench repetitions must be >= 10");
  if (warmup < 0) throw std::invalid_argument("bench warmup must be >= 0");
  if (threads < 1) throw std::invalid_argument("bench threads must be >= 1");
}

const BenchCell* BenchResult::find(int count, const std::string& mode) const {
  for (const BenchCell& c : cells) {
    if (c.count == count && c.mode == mode) return &c;
  }
  return nullptr;
}

BenchMode bench_mode_from_string(const std::string& name) {
  if (name == "analytic") return BenchMode::kAnalytic;
  if (name == "numeric") return BenchMode::kNumeric;
  if (name == "both") return BenchMode::kBoth;
  throw std::invalid_argument("unknown bench mode '" + name + "'");
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

VehicleState bench_state() {
  VehicleParams vp;
  VehicleState s;
  s.x = Vec3(0.4, -0.3, -1.5);
  s.v = Vec3(1.0, 0.2, -0.1);
  s.R = rot_z(0.3) * rot_y(0.1) * rot_x(-0.05);
  s.T = 1.1 * vp.hover_thrust();
  return s;
}

ObstacleMap bench_obstacles(int count, std::uint64_t seed) {
  SceneSpec spec;
  spec.kind = SceneKind::kRandomBox;
  spec.seed = seed;
  spec.count = count;
  spec.bounds = Box{Vec3::Constant(-10.0), Vec3::Constant(10.0)};
  return generate_scene(spec);
}

namespace {

using Clock = std::chrono::steady_clock;

BenchCell time_cell(int count, const std::string& mode, const BenchConfig& cfg,
                    const ObstacleMap& obstacles, const VehicleState& s) {
  const ChainParams chain;
  const CompositeParams cp;
  const VehicleParams vp;
  const int batch = std::max(1, cfg.batch_work / count);
  volatile double sink = 0.0;

  const auto once = [&] {
    if (mode == "analytic") {
      const BarrierEvaluation e = evaluate_composite(s, obstacles, chain, cp, vp, cfg.threads);
      sink = sink + e.lf_h1 + e.lg_h1(0);
    } else {
      const NumericLieDerivatives n = compose_numeric(obstacles, s, cp, chain, vp);
      sink = sink + n.lf_h1 + n.lg_h1(0);
    }
  };

  for (int w = 0; w < cfg.warmup; ++w) once();

  BenchCell cell;
  cell.count = count;
  cell.mode = mode;
  cell.samples_ms.reserve(static_cast<std::size_t>(cfg.repetitions));
  for (int r = 0; r < cfg.repetitions; ++r) {
    const auto start = Clock::now();
    for (int b = 0; b < batch; ++b) once();
    const std::chrono::duration<double, std::milli> elapsed = Clock::now() - start;
    cell.samples_ms.push_back(elapsed.count() / batch);
  }
  cell.median_ms = quantile(cell.samples_ms, 0.5);
  cell.p10_ms = quantile(cell.samples_ms, 0.1);
  cell.p90_ms = quantile(cell.samples_ms, 0.9);
  return cell;
}

}  // namespace

BenchResult run_bench(const BenchConfig& cfg) {
  cfg.validate();
  const VehicleState s = bench_state();
  BenchResult result;
  for (int count : cfg.obstacle_counts) {
    const ObstacleMap obstacles = bench_obstacles(count, cfg.seed);
    if (cfg.mode != BenchMode::kNumeric) {
      result.cells.push_back(time_cell(count, "analytic", cfg, obstacles, s));
    }
    if (cfg.mode != BenchMode::kAnalytic) {
      result.cells.push_back(time_cell(count, "numeric", cfg, obstacles, s));
    }
  }
  return result;
}

double scaling_slope(const BenchResult& r, const std::string& mode,
                     const std::vector<int>& counts) {
  std::vector<double> lx;
  std::vector<double> ly;
  for (int c : counts) {
    const BenchCell* cell = r.find(c, mode);
    if (!cell) throw std::invalid_argument("scaling_slope: missing bench cell");
    lx.push_back(std::log(static_cast<double>(c)));
    ly.push_back(std::log(cell->median_ms));
  }
  if (lx.size() < 2) throw std::invalid_argument("scaling_slope needs two counts");
  const double n = static_cast<double>(lx.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i] / n;
    my += ly[i] / n;
  }
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

void report(const BenchResult& r, std::ostream& out) {
  out << "count,mode,median_ms,p10_ms,p90_ms\n" << std::setprecision(17);
  for (const BenchCell& c : r.cells) {
    out << c.count << ',' << c.mode << ',' << c.median_ms << ',' << c.p10_ms
        << ',' << c.p90_ms << '\n';
  }
}

void report(const BenchResult& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open bench report " + path.string());
  report(r, out);
  out.flush();
  if (!out) throw std::runtime_error("failed writing bench report " + path.string());
}

BenchResult read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open bench report " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "count,mode,median_ms,p10_ms,p90_ms") {
    throw std::runtime_error("unexpected bench report header in " + path.string());
  }
  BenchResult r;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string count, mode, median, p10, p90;
    std::getline(ss, count, ',');
    std::getline(ss, mode, ',');
    std::getline(ss, median, ',');
    std::getline(ss, p10, ',');
    std::getline(ss, p90, ',');
    BenchCell c;
    c.count = std::stoi(count);
    c.mode = mode;
    c.median_ms = std::strtod(median.c_str(), nullptr);
    c.p10_ms = std::strtod(p10.c_str(), nullptr);
    c.p90_ms = std::strtod(p90.c_str(), nullptr);
    r.cells.push_back(c);
  }
  return r;
}

}  // namespace ccbf
