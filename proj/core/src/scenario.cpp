#include "ccbf/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace ccbf {

using nlohmann::json;

void Scenario::validate() const {
  if (!(control_rate > 0.0)) throw ScenarioError("control_rate must be positive");
  if (!(map_rate > 0.0) || map_rate > control_rate) {
    throw ScenarioError("map_rate must be positive and at most control_rate");
  }
  if (!(duration >= 0.0)) throw ScenarioError("duration must be non-negative");
  if (k_nearest < 0) throw ScenarioError("k_nearest must be non-negative");
  if (substeps < 1) throw ScenarioError("substeps must be >= 1");
  if (!(vehicle.mass > 0.0) || !(vehicle.gravity > 0.0)) {
    throw ScenarioError("vehicle mass and gravity must be positive");
  }
  if (scene.count < 0) throw ScenarioError("scene count must be >= 0");
  if (scene.kind != SceneKind::kFile && scene.bounds.degenerate()) {
    throw ScenarioError("scene bounds must have positive extent");
  }
  if (!(velocity_noise >= 0.0)) throw ScenarioError("velocity_noise must be >= 0");
  if (qp_weights.llt().info() != Eigen::Success) {
    throw ScenarioError("qp_weights must be positive definite");
  }
  try {
    chain.validate();
    composite.validate();
    thrust.validate();
    gains.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(e.what());
  }
}

FilterParams Scenario::filter_params() const {
  FilterParams fp;
  fp.chain = chain;
  fp.composite = composite;
  fp.thrust = thrust;
  fp.vehicle = vehicle;
  fp.P = qp_weights;
  fp.singular_tol = singular_tol;
  fp.slack_weight = slack_weight;
  fp.threads = threads;
  return fp;
}

VehicleState Scenario::initial_state() const {
  VehicleState s;
  s.x = initial.x;
  s.v = initial.v;
  s.R = initial.R;
  s.T = initial.T.value_or(vehicle.hover_thrust());
  return s;
}

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  if (!obj.is_object()) throw ScenarioError(where + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw ScenarioError("unknown key '" + key + "' in " + where);
    }
  }
}

Vec3 to_vec3(const json& j, const std::string& where) {
  if (j.is_number()) return Vec3::Constant(j.get<double>());
  if (!j.is_array() || j.size() != 3) {
    throw ScenarioError(where + " must be a 3-element array");
  }
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json from_vec3(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

void read_vec3(const json& obj, const char* key, Vec3& out) {
  if (obj.contains(key)) out = to_vec3(obj.at(key), key);
}

Mat3 to_rotation(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ScenarioError("R must be a 3x3 array");
  Mat3 R;
  for (int r = 0; r < 3; ++r) {
    if (!j[r].is_array() || j[r].size() != 3) {
      throw ScenarioError("R must be a 3x3 array");
    }
    for (int c = 0; c < 3; ++c) R(r, c) = j[r][c].get<double>();
  }
  if (!is_rotation(R, 1e-6)) throw ScenarioError("R is not a rotation matrix");
  return orthonormalize(R);
}

SceneSpec parse_scene(const json& j, const std::filesystem::path& base_dir) {
  reject_unknown(j, {"kind", "seed", "count", "bounds", "dead_end", "clearing", "file"},
                 "scene");
  SceneSpec spec;
  if (j.contains("kind")) spec.kind = scene_kind_from_string(j.at("kind").get<std::string>());
  read(j, "seed", spec.seed);
  read(j, "count", spec.count);
  read(j, "dead_end", spec.dead_end);
  if (j.contains("bounds")) {
    const json& b = j.at("bounds");
    reject_unknown(b, {"min", "max"}, "scene.bounds");
    read_vec3(b, "min", spec.bounds.min);
    read_vec3(b, "max", spec.bounds.max);
  }
  if (j.contains("clearing")) {
    const json& c = j.at("clearing");
    reject_unknown(c, {"center", "radius"}, "scene.clearing");
    Clearing clearing;
    read_vec3(c, "center", clearing.center);
    read(c, "radius", clearing.radius);
    spec.clearing = clearing;
  }
  if (j.contains("file")) {
    std::filesystem::path file = j.at("file").get<std::string>();
    spec.file = file.is_relative() && !base_dir.empty() ? base_dir / file : file;
    if (!j.contains("kind")) spec.kind = SceneKind::kFile;
  }
  if (spec.kind == SceneKind::kFile && spec.file.empty()) {
    throw ScenarioError("scene kind 'file' needs a 'file' entry");
  }
  return spec;
}

Mission parse_mission(const json& j) {
  reject_unknown(j, {"kind", "velocity", "altitude", "speed", "waypoint", "yaw"},
                 "mission");
  Mission m;
  if (j.contains("kind")) m.kind = mission_kind_from_string(j.at("kind").get<std::string>());
  read_vec3(j, "velocity", m.velocity);
  read(j, "altitude", m.altitude);
  read(j, "speed", m.speed);
  read_vec3(j, "waypoint", m.waypoint);
  read(j, "yaw", m.yaw);
  return m;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text,
                        const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("scenario JSON: ") + e.what());
  }
  reject_unknown(j,
                 {"scene", "mission", "duration", "control_rate", "map_rate",
                  "k_nearest", "p0", "p1", "epsilon", "kappa", "gamma", "alpha1",
                  "alpha2", "epsilon_T", "vehicle", "gains", "qp_weights",
                  "singular_tol", "slack_weight", "initial_state", "seed",
                  "filter_enabled", "substeps", "velocity_noise", "threads"},
                 "scenario");
  Scenario sc;
  try {
    if (j.contains("scene")) sc.scene = parse_scene(j.at("scene"), base_dir);
    if (j.contains("mission")) sc.mission = parse_mission(j.at("mission"));
    read(j, "duration", sc.duration);
    read(j, "control_rate", sc.control_rate);
    read(j, "map_rate", sc.map_rate);
    read(j, "k_nearest", sc.k_nearest);
    read(j, "p0", sc.chain.p0);
    read(j, "p1", sc.chain.p1);
    read(j, "epsilon", sc.chain.epsilon);
    read(j, "kappa", sc.composite.kappa);
    read(j, "gamma", sc.composite.gamma);
    read(j, "alpha1", sc.composite.alpha1);
    read(j, "alpha2", sc.thrust.alpha2);
    read(j, "epsilon_T", sc.thrust.epsilon_T);
    sc.scene.epsilon = sc.chain.epsilon;

    if (j.contains("vehicle")) {
      const json& v = j.at("vehicle");
      reject_unknown(v, {"mass", "gravity"}, "vehicle");
      read(v, "mass", sc.vehicle.mass);
      read(v, "gravity", sc.vehicle.gravity);
    }
    sc.gains = ControllerGains::for_mass(sc.vehicle.mass);
    if (j.contains("gains")) {
      const json& g = j.at("gains");
      reject_unknown(g, {"kx", "kv", "kR", "kT", "thrust_filter_hz"}, "gains");
      read_vec3(g, "kx", sc.gains.kx);
      read_vec3(g, "kv", sc.gains.kv);
      read(g, "kR", sc.gains.kR);
      read(g, "kT", sc.gains.kT);
      read(g, "thrust_filter_hz", sc.gains.thrust_filter_hz);
    }
    if (j.contains("qp_weights")) {
      const json& w = j.at("qp_weights");
      if (!w.is_array() || w.size() != 4) {
        throw ScenarioError("qp_weights must be a 4-element diagonal");
      }
      sc.qp_weights = Vec4(w[0].get<double>(), w[1].get<double>(),
                           w[2].get<double>(), w[3].get<double>())
                          .asDiagonal();
    }
    read(j, "singular_tol", sc.singular_tol);
    read(j, "slack_weight", sc.slack_weight);
    if (j.contains("initial_state")) {
      const json& s = j.at("initial_state");
      reject_unknown(s, {"x", "v", "R", "yaw", "T"}, "initial_state");
      read_vec3(s, "x", sc.initial.x);
      read_vec3(s, "v", sc.initial.v);
      if (s.contains("R") && s.contains("yaw")) {
        throw ScenarioError("initial_state: give either R or yaw, not both");
      }
      if (s.contains("R")) sc.initial.R = to_rotation(s.at("R"));
      if (s.contains("yaw")) sc.initial.R = rot_z(s.at("yaw").get<double>());
      if (s.contains("T")) sc.initial.T = s.at("T").get<double>();
    }
    read(j, "seed", sc.seed);
    read(j, "filter_enabled", sc.filter_enabled);
    read(j, "substeps", sc.substeps);
    read(j, "velocity_noise", sc.velocity_noise);
    read(j, "threads", sc.threads);
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("scenario JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(e.what());
  }
  sc.validate();
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str(), path.parent_path());
}

std::string scenario_to_json(const Scenario& sc) {
  json scene = {{"kind", to_string(sc.scene.kind)},
                {"seed", sc.scene.seed},
                {"count", sc.scene.count},
                {"bounds", {{"min", from_vec3(sc.scene.bounds.min)},
                            {"max", from_vec3(sc.scene.bounds.max)}}},
                {"dead_end", sc.scene.dead_end}};
  if (sc.scene.clearing) {
    scene["clearing"] = {{"center", from_vec3(sc.scene.clearing->center)},
                         {"radius", sc.scene.clearing->radius}};
  }
  if (!sc.scene.file.empty()) scene["file"] = sc.scene.file.string();

  json initial = {{"x", from_vec3(sc.initial.x)}, {"v", from_vec3(sc.initial.v)}};
  json R = json::array();
  for (int r = 0; r < 3; ++r) {
    R.push_back(json::array({sc.initial.R(r, 0), sc.initial.R(r, 1), sc.initial.R(r, 2)}));
  }
  initial["R"] = R;
  if (sc.initial.T) initial["T"] = *sc.initial.T;

  const Vec4 w = sc.qp_weights.diagonal();
  json j = {
      {"scene", scene},
      {"mission", {{"kind", to_string(sc.mission.kind)},
                   {"velocity", from_vec3(sc.mission.velocity)},
                   {"altitude", sc.mission.altitude},
                   {"speed", sc.mission.speed},
                   {"waypoint", from_vec3(sc.mission.waypoint)},
                   {"yaw", sc.mission.yaw}}},
      {"duration", sc.duration},
      {"control_rate", sc.control_rate},
      {"map_rate", sc.map_rate},
      {"k_nearest", sc.k_nearest},
      {"p0", sc.chain.p0},
      {"p1", sc.chain.p1},
      {"epsilon", sc.chain.epsilon},
      {"kappa", sc.composite.kappa},
      {"gamma", sc.composite.gamma},
      {"alpha1", sc.composite.alpha1},
      {"alpha2", sc.thrust.alpha2},
      {"epsilon_T", sc.thrust.epsilon_T},
      {"vehicle", {{"mass", sc.vehicle.mass}, {"gravity", sc.vehicle.gravity}}},
      {"gains", {{"kx", from_vec3(sc.gains.kx)},
                 {"kv", from_vec3(sc.gains.kv)},
                 {"kR", sc.gains.kR},
                 {"kT", sc.gains.kT},
                 {"thrust_filter_hz", sc.gains.thrust_filter_hz}}},
      {"qp_weights", json::array({w(0), w(1), w(2), w(3)})},
      {"singular_tol", sc.singular_tol},
      {"slack_weight", sc.slack_weight},
      {"initial_state", initial},
      {"seed", sc.seed},
      {"filter_enabled", sc.filter_enabled},
      {"substeps", sc.substeps},
      {"velocity_noise", sc.velocity_noise},
      {"threads", sc.threads},
  };
  return j.dump(2);
}

Scenario corridor_scenario() {
  Scenario sc;
  sc.scene.kind = SceneKind::kCorridor;
  sc.scene.seed = 7;
  sc.scene.count = 4000;
  sc.scene.bounds = Box{Vec3(-2.0, -2.0, -3.0), Vec3(18.0, 2.0, 0.0)};
  sc.scene.dead_end = true;
  sc.mission.kind = MissionKind::kNaive;
  sc.mission.velocity = Vec3(1.0, 0.0, 0.0);
  sc.mission.altitude = 1.3;
  sc.duration = 60.0;
  sc.initial.x = Vec3(0.0, 0.0, -1.3);
  sc.seed = 1;
  return sc;
}

Scenario forest_scenario() {
  Scenario sc;
  sc.scene.kind = SceneKind::kForest;
  sc.scene.seed = 11;
  sc.scene.count = 1260;
  sc.scene.bounds = Box{Vec3(-10.0, -10.0, -4.0), Vec3(10.0, 10.0, 0.0)};
  sc.scene.clearing = Clearing{Vec3::Zero(), 2.0};
  sc.mission.kind = MissionKind::kAdversarial;
  sc.mission.speed = 1.5;
  sc.duration = 60.0;
  sc.initial.x = Vec3(0.0, 0.0, -1.3);
  sc.seed = 2;
  return sc;
}

}  // namespace ccbf
