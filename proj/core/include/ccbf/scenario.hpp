#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "ccbf/barrier.hpp"
#include "ccbf/composite.hpp"
#include "ccbf/controller.hpp"
#include "ccbf/filter.hpp"
#include "ccbf/obstacles.hpp"
#include "ccbf/vehicle.hpp"

namespace ccbf {

struct InitialState {
  Vec3 x = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Mat3 R = Mat3::Identity();
  std::optional<double> T;  // hover thrust when unset
};

struct Scenario {
  SceneSpec scene;
  Mission mission;
  double duration = 60.0;      // s
  double control_rate = 100.0; // Hz
  double map_rate = 10.0;      // Hz, obstacle subset refresh
  int k_nearest = 400;

  ChainParams chain;
  CompositeParams composite;
  ThrustBarrierParams thrust;
  VehicleParams vehicle;
  ControllerGains gains = ControllerGains::for_mass(VehicleParams{}.mass);
  Mat4 qp_weights = Mat4::Identity();
  double singular_tol = 1e-3;
  double slack_weight = 1e6;

  InitialState initial;
  std::uint64_t seed = 0;
  bool filter_enabled = true;
  int substeps = 1;             // RK4 steps per control period
  double velocity_noise = 0.0;  // std-dev of additive v_d noise, m/s
  int threads = 1;

  void validate() const;
  FilterParams filter_params() const;
  VehicleState initial_state() const;
};

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// JSON with keys mirroring Scenario; unknown keys are rejected. Relative
// obstacle-file paths resolve against `base_dir`.
Scenario parse_scenario(const std::string& json_text,
                        const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);
std::string scenario_to_json(const Scenario& sc);

// Desk-scale analogs of the two flight experiments.
Scenario corridor_scenario();     // constant 1 m/s reference into a dead-end hallway
Scenario forest_scenario();       // adversarial reference toward the nearest trunk

}  // namespace ccbf
