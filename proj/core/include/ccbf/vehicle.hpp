#pragma once

#include <Eigen/Dense>

namespace ccbf {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

inline const Vec3 kE3 = Vec3::UnitZ();

// World frame is NED, body frame is FRD. Gravity acts along +e3.
struct VehicleParams {
  double mass = 2.58;  // kg
  double gravity = 9.81;  // m/s^2

  double hover_thrust() const { return mass * gravity; }
};

// Full state of the rate/thrust-rate controlled multirotor.
struct VehicleState {
  Vec3 x = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Mat3 R = Mat3::Identity();  // body FRD -> world NED
  double T = 0.0;             // collective thrust, N

  Vec3 thrust_axis() const { return R.col(2); }
};

// u = [p, q, r, tau]: body rates in rad/s and thrust rate in N/s.
struct RateThrustInput {
  Vec3 omega = Vec3::Zero();
  double tau = 0.0;

  Vec4 as_vector() const { return Vec4(omega.x(), omega.y(), omega.z(), tau); }
  static RateThrustInput from_vector(const Vec4& u) {
    return {u.head<3>(), u(3)};
  }
};

struct StateDerivative {
  Vec3 x_dot = Vec3::Zero();
  Vec3 v_dot = Vec3::Zero();
  Mat3 R_dot = Mat3::Zero();
  double T_dot = 0.0;
};

Mat3 hat(const Vec3& a);
// Inverse of hat for skew-symmetric input; uses the antisymmetric part otherwise.
Vec3 vee(const Mat3& m);

Mat3 rotation_exp(const Vec3& w);
Mat3 rot_x(double angle);
Mat3 rot_y(double angle);
Mat3 rot_z(double angle);

// Gram-Schmidt re-orthonormalization, keeping the third column direction.
Mat3 orthonormalize(const Mat3& R);
bool is_rotation(const Mat3& R, double tol = 1e-9);

// Translational acceleration g e3 - (T/m) R e3.
Vec3 acceleration(const VehicleState& s, const VehicleParams& p);

// Dynamics with u = 0.
StateDerivative drift(const VehicleState& s, const VehicleParams& p);
StateDerivative dynamics(const VehicleState& s, const RateThrustInput& u,
                         const VehicleParams& p);

// One RK4 step on (x, v, T) with the rotation advanced by the exact exponential
// of the (constant) body rate at each stage.
VehicleState step(const VehicleState& s, const RateThrustInput& u,
                  const VehicleParams& p, double dt);

bool is_finite(const VehicleState& s);

// Integrates with periodic re-orthonormalization of R.
class Integrator {
 public:
  explicit Integrator(VehicleParams params, int renormalize_every = 1000)
      : params_(params), renormalize_every_(renormalize_every) {}

  VehicleState advance(const VehicleState& s, const RateThrustInput& u,
                       double dt);

  const VehicleParams& params() const { return params_; }
  long steps() const { return steps_; }

 private:
  VehicleParams params_;
  int renormalize_every_;
  long steps_ = 0;
};

}  // namespace ccbf
