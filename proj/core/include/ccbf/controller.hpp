#pragma once

#include <optional>
#include <stdexcept>

#include "ccbf/obstacles.hpp"
#include "ccbf/vehicle.hpp"

namespace ccbf {

struct ControllerGains {
  Vec3 kx = Vec3::Constant(6.0 * 2.58);  // N/m, diagonal of Kx
  Vec3 kv = Vec3::Constant(4.0 * 2.58);  // N s/m, diagonal of Kv
  double kR = 8.0;                       // 1/s
  double kT = 10.0;                      // 1/s
  double thrust_filter_hz = 20.0;        // cutoff of the thrust reference

  // Defaults scaled with the vehicle mass: Kx = 6 m I, Kv = 4 m I.
  static ControllerGains for_mass(double mass);
  void validate() const;
};

// Position-level command before the attitude is resolved.
struct TrackingSetpoint {
  Vec3 x_d = Vec3::Zero();
  Vec3 v_d = Vec3::Zero();
  Vec3 a_d = Vec3::Zero();
  double yaw_d = 0.0;
  // Per-axis mask applied to Kx; zero entries leave that position axis free.
  Vec3 position_mask = Vec3::Ones();
};

struct ReferenceSetpoint {
  TrackingSetpoint tracking;
  Mat3 R_d = Mat3::Identity();
  Vec3 omega_d = Vec3::Zero();
  Vec3 force = Vec3::Zero();  // m g e3 - m a_d + Kx e_x + Kv e_v
};

class ControllerSingularity : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Commanded force f = m g e3 - m a_d + Kx (x - x_d) + Kv (v - v_d) and the
// attitude whose thrust axis R e3 is aligned with f.
ReferenceSetpoint desired_attitude(const VehicleState& s,
                                   const TrackingSetpoint& sp,
                                   const ControllerGains& gains,
                                   const VehicleParams& vp,
                                   const std::optional<Vec3>& previous_b1 = {});

// Attitude part of the geometric law:
// Omega = -(kR/2) vee(R_d^T R - R^T R_d) + R^T R_d Omega_d.
Vec3 attitude_rate_command(const Mat3& R, const Mat3& R_d, const Vec3& omega_d,
                           double kR);

double attitude_error(const Mat3& R, const Mat3& R_d);

// Desired collective thrust T_d = f^T R e3.
double desired_thrust(const VehicleState& s, const ReferenceSetpoint& sp);

// Geometric tracking controller on (Omega, tau). Holds the thrust reference
// filter and the last valid heading vector.
class GeometricController {
 public:
  GeometricController(ControllerGains gains, VehicleParams vp, double dt);

  RateThrustInput reference_input(const VehicleState& s,
                                  const ReferenceSetpoint& sp);
  // desired_attitude followed by reference_input.
  RateThrustInput update(const VehicleState& s, const TrackingSetpoint& sp);

  void reset();
  const ControllerGains& gains() const { return gains_; }
  const ReferenceSetpoint& last_setpoint() const { return last_setpoint_; }
  double thrust_reference() const { return thrust_ref_.value_or(0.0); }

 private:
  ControllerGains gains_;
  VehicleParams vp_;
  double dt_;
  double filter_gain_;
  std::optional<double> thrust_ref_;
  std::optional<Vec3> last_b1_;
  ReferenceSetpoint last_setpoint_;
};

enum class MissionKind { kNaive, kAdversarial, kHover, kWaypoint };

struct Mission {
  MissionKind kind = MissionKind::kHover;
  Vec3 velocity = Vec3::UnitX();   // naive: constant velocity reference, m/s
  double altitude = 1.3;           // m above the NED origin (z = -altitude)
  double speed = 1.5;              // adversarial approach speed, m/s
  Vec3 waypoint = Vec3::Zero();    // waypoint/hover target; hover uses x0 if unset
  double yaw = 0.0;
};

std::string to_string(MissionKind kind);
MissionKind mission_kind_from_string(const std::string& name);

// Velocity missions hold the lateral position free and regulate height; the
// adversarial mission flies at `speed` toward `nearest_obstacle`.
TrackingSetpoint mission_setpoint(double t, const Mission& mission,
                                  const VehicleState& s,
                                  const std::optional<Vec3>& nearest_obstacle = {});

}  // namespace ccbf
