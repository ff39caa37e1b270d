#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccbf/vehicle.hpp"

namespace ccbf {

// Point obstacles with a common clearance radius.
struct ObstacleMap {
  std::vector<Vec3> points;  // m, NED
  double epsilon = 0.5;      // m

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

struct Box {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Ones();

  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  bool degenerate() const { return !((max.array() > min.array()).all()); }
};

enum class SceneKind { kCorridor, kForest, kRandomBox, kFile };

struct Clearing {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;  // horizontal radius kept free of obstacles
};

struct SceneSpec {
  SceneKind kind = SceneKind::kRandomBox;
  std::uint64_t seed = 0;
  int count = 0;
  Box bounds;
  double epsilon = 0.5;
  bool dead_end = true;  // corridor only: close the corridor with a cap wall
  std::optional<Clearing> clearing;  // forest/random-box only
  std::filesystem::path file;        // kind == kFile
};

class ObstacleParseError : public std::runtime_error {
 public:
  ObstacleParseError(const std::string& path, std::size_t line,
                     const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// CSV, one `x,y,z` per row; blank lines and `#` comments are skipped.
ObstacleMap parse_obstacles(std::istream& in, double epsilon,
                            const std::string& source = "<stream>");
ObstacleMap load_obstacles(const std::filesystem::path& path,
                           double epsilon = 0.5);
void save_obstacles(const ObstacleMap& map, const std::filesystem::path& path);

// The min(k, N) points closest to x, ordered by distance with ties broken by
// original index.
ObstacleMap k_nearest(const ObstacleMap& map, const Vec3& x, int k);

// Index of the nearest point, or nullopt for an empty map.
std::optional<std::size_t> nearest_index(const ObstacleMap& map, const Vec3& x);

ObstacleMap generate_scene(const SceneSpec& spec);

std::string to_string(SceneKind kind);
SceneKind scene_kind_from_string(const std::string& name);

}  // namespace ccbf
