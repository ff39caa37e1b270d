#include "ccbf/controller.hpp"

#include <cmath>
#include <numbers>

namespace ccbf {

ControllerGains ControllerGains::for_mass(double mass) {
  ControllerGains g;
  g.kx = Vec3::Constant(6.0 * mass);
  g.kv = Vec3::Constant(4.0 * mass);
  return g;
}

void ControllerGains::validate() const {
  if (!((kx.array() > 0.0).all() && (kv.array() > 0.0).all() && kR > 0.0 &&
        kT > 0.0 && thrust_filter_hz > 0.0)) {
    throw std::invalid_argument("controller gains must be positive");
  }
}

ReferenceSetpoint desired_attitude(const VehicleState& s,
                                   const TrackingSetpoint& sp,
                                   const ControllerGains& gains,
                                   const VehicleParams& vp,
                                   const std::optional<Vec3>& previous_b1) {
  const Vec3 e_x = (s.x - sp.x_d).cwiseProduct(sp.position_mask);
  const Vec3 e_v = s.v - sp.v_d;
  const Vec3 f = vp.mass * vp.gravity * kE3 - vp.mass * sp.a_d +
                 gains.kx.cwiseProduct(e_x) + gains.kv.cwiseProduct(e_v);
  const double f_norm = f.norm();
  if (f_norm < 1e-6) {
    throw ControllerSingularity("commanded force vanishes (free-fall command)");
  }
  const Vec3 b3 = f / f_norm;

  const Vec3 heading(std::cos(sp.yaw_d), std::sin(sp.yaw_d), 0.0);
  Vec3 b2 = b3.cross(heading);
  if (b2.norm() < 1e-6) {
    // Heading parallel to the thrust axis: keep the previous b1 instead.
    if (!previous_b1) {
      throw ControllerSingularity("desired heading is parallel to the thrust axis");
    }
    b2 = b3.cross(*previous_b1);
    if (b2.norm() < 1e-6) {
      throw ControllerSingularity("previous heading is parallel to the thrust axis");
    }
  }
  b2.normalize();
  const Vec3 b1 = b2.cross(b3);

  ReferenceSetpoint out;
  out.tracking = sp;
  out.R_d.col(0) = b1;
  out.R_d.col(1) = b2;
  out.R_d.col(2) = b3;
  out.omega_d = Vec3::Zero();
  out.force = f;
  return out;
}

Vec3 attitude_rate_command(const Mat3& R, const Mat3& R_d, const Vec3& omega_d,
                           double kR) {
  return -0.5 * kR * vee(R_d.transpose() * R - R.transpose() * R_d) +
         R.transpose() * R_d * omega_d;
}

double attitude_error(const Mat3& R, const Mat3& R_d) {
  return 0.5 * (Mat3::Identity() - R_d.transpose() * R).trace();
}

double desired_thrust(const VehicleState& s, const ReferenceSetpoint& sp) {
  return sp.force.dot(s.thrust_axis());
}

GeometricController::GeometricController(ControllerGains gains,
                                         VehicleParams vp, double dt)
    : gains_(gains), vp_(vp), dt_(dt) {
  gains_.validate();
  if (!(dt > 0.0)) throw std::invalid_argument("controller period must be positive");
  filter_gain_ = 1.0 - std::exp(-2.0 * std::numbers::pi * gains_.thrust_filter_hz * dt_);
}

void GeometricController::reset() {
  thrust_ref_.reset();
  last_b1_.reset();
}

RateThrustInput GeometricController::reference_input(
    const VehicleState& s, const ReferenceSetpoint& sp) {
  RateThrustInput u;
  u.omega = attitude_rate_command(s.R, sp.R_d, sp.omega_d, gains_.kR);

  const double thrust_d = desired_thrust(s, sp);
  if (!thrust_ref_) thrust_ref_ = thrust_d;
  // First-order reference model on T_d; its exact rate is the feed-forward.
  const double increment = filter_gain_ * (thrust_d - *thrust_ref_);
  u.tau = gains_.kT * (*thrust_ref_ - s.T) + increment / dt_;
  *thrust_ref_ += increment;
  last_setpoint_ = sp;
  return u;
}

RateThrustInput GeometricController::update(const VehicleState& s,
                                            const TrackingSetpoint& sp) {
  const ReferenceSetpoint ref = desired_attitude(s, sp, gains_, vp_, last_b1_);
  last_b1_ = ref.R_d.col(0);
  return reference_input(s, ref);
}

std::string to_string(MissionKind kind) {
  switch (kind) {
    case MissionKind::kNaive: return "naive";
    case MissionKind::kAdversarial: return "adversarial";
    case MissionKind::kHover: return "hover";
    case MissionKind::kWaypoint: return "waypoint";
  }
  return "unknown";
}

MissionKind mission_kind_from_string(const std::string& name) {
  if (name == "naive") return MissionKind::kNaive;
  if (name == "adversarial") return MissionKind::kAdversarial;
  if (name == "hover") return MissionKind::kHover;
  if (name == "waypoint") return MissionKind::kWaypoint;
  throw std::invalid_argument("unknown mission kind '" + name + "'");
}

TrackingSetpoint mission_setpoint([[maybe_unused]] double t,
                                  const Mission& mission, const VehicleState& s,
                                  const std::optional<Vec3>& nearest_obstacle) {
  TrackingSetpoint sp;
  sp.yaw_d = mission.yaw;
  switch (mission.kind) {
    case MissionKind::kNaive:
      sp.v_d = mission.velocity;
      sp.x_d = Vec3(s.x.x(), s.x.y(), -mission.altitude);
      sp.position_mask = Vec3(0.0, 0.0, 1.0);
      break;
    case MissionKind::kAdversarial: {
      sp.x_d = s.x;
      sp.position_mask = Vec3::Zero();
      if (nearest_obstacle) {
        const Vec3 bearing = *nearest_obstacle - s.x;
        const double len = bearing.norm();
        if (len > 0.0) sp.v_d = mission.speed * bearing / len;
      }
      break;
    }
    case MissionKind::kHover:
    case MissionKind::kWaypoint:
      sp.x_d = mission.waypoint;
      break;
  }
  return sp;
}

}  // namespace ccbf
