#include "ccbf/vehicle.hpp"

#include <cmath>
#include <stdexcept>

namespace ccbf {

Mat3 hat(const Vec3& a) {
  Mat3 m;
  m << 0.0, -a.z(), a.y(),
       a.z(), 0.0, -a.x(),
       -a.y(), a.x(), 0.0;
  return m;
}

Vec3 vee(const Mat3& m) {
  return 0.5 * Vec3(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
}

Mat3 rotation_exp(const Vec3& w) {
  const double theta = w.norm();
  const Mat3 K = hat(w);
  if (theta < 1e-8) {
    return Mat3::Identity() + K + 0.5 * K * K;
  }
  const double a = std::sin(theta) / theta;
  const double b = (1.0 - std::cos(theta)) / (theta * theta);
  return Mat3::Identity() + a * K + b * K * K;
}

Mat3 rot_x(double angle) { return rotation_exp(angle * Vec3::UnitX()); }
Mat3 rot_y(double angle) { return rotation_exp(angle * Vec3::UnitY()); }
Mat3 rot_z(double angle) { return rotation_exp(angle * Vec3::UnitZ()); }

Mat3 orthonormalize(const Mat3& R) {
  Vec3 c3 = R.col(2).normalized();
  Vec3 c1 = R.col(0) - c3.dot(R.col(0)) * c3;
  c1.normalize();
  Mat3 out;
  out.col(0) = c1;
  out.col(1) = c3.cross(c1);
  out.col(2) = c3;
  return out;
}

bool is_rotation(const Mat3& R, double tol) {
  if (!R.allFinite()) return false;
  return (R.transpose() * R - Mat3::Identity()).norm() <= tol &&
         std::abs(R.determinant() - 1.0) <= tol;
}

Vec3 acceleration(const VehicleState& s, const VehicleParams& p) {
  return p.gravity * kE3 - (s.T / p.mass) * s.thrust_axis();
}

StateDerivative drift(const VehicleState& s, const VehicleParams& p) {
  StateDerivative d;
  d.x_dot = s.v;
  d.v_dot = acceleration(s, p);
  return d;
}

StateDerivative dynamics(const VehicleState& s, const RateThrustInput& u,
                         const VehicleParams& p) {
  StateDerivative d = drift(s, p);
  d.R_dot = s.R * hat(u.omega);
  d.T_dot = u.tau;
  return d;
}

VehicleState step(const VehicleState& s, const RateThrustInput& u,
                  const VehicleParams& p, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");

  // R(t) = R0 exp(hat(omega) t) and T(t) = T0 + tau t are exact; x, v use RK4
  // with the stage attitude/thrust evaluated at the stage time.
  const auto stage = [&](double t, const Vec3& v) {
    VehicleState st;
    st.R = s.R * rotation_exp(u.omega * t);
    st.T = s.T + u.tau * t;
    st.v = v;
    return acceleration(st, p);
  };

  const Vec3 k1x = s.v;
  const Vec3 k1v = stage(0.0, s.v);
  const Vec3 k2x = s.v + 0.5 * dt * k1v;
  const Vec3 k2v = stage(0.5 * dt, k2x);
  const Vec3 k3x = s.v + 0.5 * dt * k2v;
  const Vec3 k3v = stage(0.5 * dt, k3x);
  const Vec3 k4x = s.v + dt * k3v;
  const Vec3 k4v = stage(dt, k4x);

  VehicleState out;
  out.x = s.x + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
  out.v = s.v + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  out.R = s.R * rotation_exp(u.omega * dt);
  out.T = s.T + u.tau * dt;
  return out;
}

bool is_finite(const VehicleState& s) {
  return s.x.allFinite() && s.v.allFinite() && s.R.allFinite() &&
         std::isfinite(s.T);
}

VehicleState Integrator::advance(const VehicleState& s,
                                 const RateThrustInput& u, double dt) {
  VehicleState out = step(s, u, params_, dt);
  ++steps_;
  if (renormalize_every_ > 0 && steps_ % renormalize_every_ == 0) {
    out.R = orthonormalize(out.R);
  }
  return out;
}

}  // namespace ccbf
