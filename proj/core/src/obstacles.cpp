#include "ccbf/obstacles.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

namespace ccbf {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

bool parse_double(const std::string& field, double& out) {
  const std::string t = trim(field);
  if (t.empty()) return false;
  const char* begin = t.data();
  const char* end = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

constexpr double kColumnSpacing = 0.2;  // m, vertical spacing of tree/pillar points

}  // namespace

ObstacleParseError::ObstacleParseError(const std::string& path,
                                       std::size_t line,
                                       const std::string& what)
    : std::runtime_error(path + ":" + std::to_string(line) + ": " + what),
      line_(line) {}

ObstacleMap parse_obstacles(std::istream& in, double epsilon,
                            const std::string& source) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("obstacle clearance epsilon must be positive");
  }
  ObstacleMap map;
  map.epsilon = epsilon;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;

    std::vector<std::string> fields;
    std::stringstream ss(t);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 3) {
      throw ObstacleParseError(source, lineno,
                               "expected 3 comma-separated values, got " +
                                   std::to_string(fields.size()));
    }
    Vec3 p;
    for (int i = 0; i < 3; ++i) {
      if (!parse_double(fields[i], p[i])) {
        throw ObstacleParseError(source, lineno,
                                 "invalid number '" + trim(fields[i]) + "'");
      }
    }
    map.points.push_back(p);
  }
  return map;
}

ObstacleMap load_obstacles(const std::filesystem::path& path, double epsilon) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open obstacle file " + path.string());
  }
  ObstacleMap map = parse_obstacles(in, epsilon, path.string());
  if (map.empty()) {
    std::cerr << "warning: obstacle file " << path.string()
              << " contains no obstacles\n";
  }
  return map;
}

void save_obstacles(const ObstacleMap& map, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write obstacle file " + path.string());
  out << std::setprecision(17);
  for (const Vec3& p : map.points) {
    out << p.x() << ',' << p.y() << ',' << p.z() << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

ObstacleMap k_nearest(const ObstacleMap& map, const Vec3& x, int k) {
  if (k < 0) throw std::invalid_argument("k_nearest: k must be non-negative");
  const std::size_t n = map.points.size();
  const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(k), n);

  std::vector<double> dist2(n);
  for (std::size_t i = 0; i < n; ++i) dist2[i] = (map.points[i] - x).squaredNorm();

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  const auto closer = [&](std::size_t a, std::size_t b) {
    return dist2[a] < dist2[b] || (dist2[a] == dist2[b] && a < b);
  };
  if (keep < n) {
    std::nth_element(idx.begin(), idx.begin() + keep, idx.end(), closer);
    idx.resize(keep);
  }
  std::sort(idx.begin(), idx.end(), closer);

  ObstacleMap out;
  out.epsilon = map.epsilon;
  out.points.reserve(keep);
  for (std::size_t i : idx) out.points.push_back(map.points[i]);
  return out;
}

std::optional<std::size_t> nearest_index(const ObstacleMap& map, const Vec3& x) {
  if (map.empty()) return std::nullopt;
  std::size_t best = 0;
  double best_d2 = (map.points[0] - x).squaredNorm();
  for (std::size_t i = 1; i < map.points.size(); ++i) {
    const double d2 = (map.points[i] - x).squaredNorm();
    if (d2 < best_d2) {
      best = i;
      best_d2 = d2;
    }
  }
  return best;
}

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

bool in_clearing(const SceneSpec& spec, const Vec3& p) {
  if (!spec.clearing) return false;
  const Vec3 d = p - spec.clearing->center;
  return std::hypot(d.x(), d.y()) < spec.clearing->radius;
}

void add_column(ObstacleMap& map, double x, double y, double z_lo, double z_hi,
                int budget) {
  for (int j = 0; j < budget; ++j) {
    const double z = z_hi - j * kColumnSpacing;
    if (z < z_lo - 1e-12) break;
    map.points.emplace_back(x, y, z);
  }
}

int column_capacity(double z_lo, double z_hi) {
  return static_cast<int>(std::floor((z_hi - z_lo) / kColumnSpacing + 1e-9)) + 1;
}

// Walls at y = min.y and y = max.y, an optional cap at x = max.x, and vertical
// pillars every 2-3 m alternating between the two halves of the corridor.
ObstacleMap corridor(const SceneSpec& spec, Rng& rng) {
  ObstacleMap map;
  map.epsilon = spec.epsilon;
  if (spec.count == 0) return map;
  const Box& b = spec.bounds;
  const Vec3 size = b.max - b.min;
  const double center_y = 0.5 * (b.min.y() + b.max.y());
  const double half_width = 0.5 * size.y();

  std::vector<Vec3> pillars;
  int side = 1;
  for (double px = b.min.x() + 3.0 + uniform(rng, 0.0, 1.0);
       px < b.max.x() - 2.5; px += uniform(rng, 2.0, 3.0)) {
    const double offset = half_width * uniform(rng, 0.45, 0.6);
    pillars.emplace_back(px, center_y + side * offset, 0.0);
    side = -side;
  }

  const int pillar_budget = pillars.empty() ? 0 : spec.count * 15 / 100;
  const int surface_budget = spec.count - pillar_budget;
  const double wall_area = 2.0 * size.x() * size.z();
  const double cap_area = spec.dead_end ? size.y() * size.z() : 0.0;
  const double cap_fraction = cap_area / (wall_area + cap_area);

  for (int i = 0; i < surface_budget; ++i) {
    const double z = uniform(rng, b.min.z(), b.max.z());
    if (uniform(rng, 0.0, 1.0) < cap_fraction) {
      map.points.emplace_back(b.max.x(), uniform(rng, b.min.y(), b.max.y()), z);
    } else {
      const double y = (i % 2 == 0) ? b.min.y() : b.max.y();
      map.points.emplace_back(uniform(rng, b.min.x(), b.max.x()), y, z);
    }
  }

  if (!pillars.empty()) {
    const int per_pillar = pillar_budget / static_cast<int>(pillars.size());
    int remainder = pillar_budget % static_cast<int>(pillars.size());
    for (const Vec3& p : pillars) {
      const int n = per_pillar + (remainder-- > 0 ? 1 : 0);
      // Evenly spread over the pillar height so sparse budgets stay in bounds.
      for (int j = 0; j < n; ++j) {
        const double z = b.max.z() - size.z() * (j + 0.5) / n;
        map.points.emplace_back(p.x(), p.y(), z);
      }
    }
  }
  return map;
}

// Vertical point columns (tree trunks) at random positions, at least 1.5 m
// apart, with `count` points in total.
ObstacleMap forest(const SceneSpec& spec, Rng& rng) {
  ObstacleMap map;
  map.epsilon = spec.epsilon;
  const Box& b = spec.bounds;
  const int per_tree = column_capacity(b.min.z(), b.max.z());
  int remaining = spec.count;
  std::vector<Vec3> trunks;
  constexpr double kMinSpacing = 1.5;
  constexpr int kMaxAttempts = 1000;
  while (remaining > 0) {
    Vec3 c;
    bool placed = false;
    for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
      c = Vec3(uniform(rng, b.min.x(), b.max.x()),
               uniform(rng, b.min.y(), b.max.y()), 0.0);
      if (in_clearing(spec, c)) continue;
      placed = std::none_of(trunks.begin(), trunks.end(), [&](const Vec3& t) {
        return (t - c).head<2>().norm() < kMinSpacing;
      });
    }
    if (!placed) break;  // bounds saturated
    trunks.push_back(c);
    const int n = std::min(per_tree, remaining);
    add_column(map, c.x(), c.y(), b.min.z(), b.max.z(), n);
    remaining -= n;
  }
  return map;
}

ObstacleMap random_box(const SceneSpec& spec, Rng& rng) {
  ObstacleMap map;
  map.epsilon = spec.epsilon;
  const Box& b = spec.bounds;
  map.points.reserve(static_cast<std::size_t>(spec.count));
  while (static_cast<int>(map.points.size()) < spec.count) {
    const Vec3 p(uniform(rng, b.min.x(), b.max.x()),
                 uniform(rng, b.min.y(), b.max.y()),
                 uniform(rng, b.min.z(), b.max.z()));
    if (in_clearing(spec, p)) continue;
    map.points.push_back(p);
  }
  return map;
}

}  // namespace

ObstacleMap generate_scene(const SceneSpec& spec) {
  if (spec.count < 0) throw std::invalid_argument("scene count must be >= 0");
  if (spec.kind == SceneKind::kFile) return load_obstacles(spec.file, spec.epsilon);
  if (spec.bounds.degenerate()) {
    throw std::invalid_argument("scene bounds must have positive extent");
  }
  Rng rng(spec.seed);
  switch (spec.kind) {
    case SceneKind::kCorridor:
      return corridor(spec, rng);
    case SceneKind::kForest:
      return forest(spec, rng);
    case SceneKind::kRandomBox:
      return random_box(spec, rng);
    case SceneKind::kFile:
      break;
  }
  throw std::logic_error("unhandled scene kind");
}

std::string to_string(SceneKind kind) {
  switch (kind) {
    case SceneKind::kCorridor: return "corridor";
    case SceneKind::kForest: return "forest";
    case SceneKind::kRandomBox: return "random-box";
    case SceneKind::kFile: return "file";
  }
  return "unknown";
}

SceneKind scene_kind_from_string(const std::string& name) {
  if (name == "corridor") return SceneKind::kCorridor;
  if (name == "forest") return SceneKind::kForest;
  if (name == "random-box") return SceneKind::kRandomBox;
  if (name == "file") return SceneKind::kFile;
  throw std::invalid_argument("unknown scene kind '" + name + "'");
}

}  // namespace ccbf
