#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ccbf/vehicle.hpp"
#include "oracles.hpp"

namespace ccbf {
namespace {

VehicleState hover_state(const VehicleParams& vp = {}) {
  VehicleState s;
  s.T = vp.hover_thrust();
  return s;
}

TEST(Hat, CrossProductAndZero) {
  EXPECT_TRUE((hat(Vec3::UnitZ()) * Vec3::UnitX()).isApprox(Vec3::UnitY()));
  EXPECT_TRUE(hat(Vec3::Zero()).isZero(0.0));

  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const Vec3 a = oracle::uniform3(rng, -2, 2);
    const Vec3 b = oracle::uniform3(rng, -2, 2);
    EXPECT_LT((hat(a) * b - a.cross(b)).norm(), 1e-14);
    EXPECT_LT((vee(hat(a)) - a).norm(), 1e-15);
  }
}

TEST(RotationExp, ClosedForms) {
  EXPECT_TRUE(rotation_exp(Vec3(0, 0, M_PI / 2)).isApprox(rot_z(M_PI / 2), 1e-14));
  EXPECT_TRUE(rotation_exp(Vec3::Zero()).isIdentity(0.0));
  // Small-angle branch stays consistent with the closed form.
  const Vec3 tiny(1e-10, -2e-10, 5e-11);
  EXPECT_LT((rotation_exp(tiny) - (Mat3::Identity() + hat(tiny))).norm(), 1e-18);
}

TEST(RotationExp, InverseProperty) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const Vec3 w = oracle::uniform3(rng, -4, 4);
    EXPECT_LT((rotation_exp(w) * rotation_exp(-w) - Mat3::Identity()).norm(), 1e-12);
    EXPECT_TRUE(is_rotation(rotation_exp(w), 1e-12));
  }
}

TEST(Drift, HoverFreeFallAndTilt) {
  const VehicleParams vp;
  EXPECT_LT(drift(hover_state(), vp).v_dot.norm(), 1e-14);

  VehicleState fall;
  EXPECT_TRUE(drift(fall, vp).v_dot.isApprox(Vec3(0, 0, vp.gravity)));

  const double theta = 0.3;
  VehicleState tilted = hover_state();
  tilted.R = rot_y(theta);
  const Vec3 vdot = drift(tilted, vp).v_dot;
  const Vec3 thrust_axis = tilted.R * kE3;
  EXPECT_NEAR(vdot.z(), vp.gravity * (1 - std::cos(theta)), 1e-13);
  EXPECT_LT((vdot - vp.gravity * (kE3 - thrust_axis)).norm(), 1e-13);

  // Cross-check against a short simulated trajectory.
  const double dt = 1e-6;
  const VehicleState next = step(tilted, {}, vp, dt);
  EXPECT_LT(((next.v - tilted.v) / dt - vdot).norm(), 1e-6);
}

TEST(Drift, MatchesFiniteDifference) {
  const VehicleParams vp;
  std::mt19937_64 rng(17);
  const double dt = 1e-6;
  for (int i = 0; i < 100; ++i) {
    const VehicleState s = oracle::random_state(rng, vp);
    const StateDerivative d = drift(s, vp);
    const VehicleState n = step(s, {}, vp, dt);
    const Vec3 fx = (n.x - s.x) / dt;
    const Vec3 fv = (n.v - s.v) / dt;
    EXPECT_LT((fx - d.x_dot).norm(), 1e-4 * std::max(1.0, d.x_dot.norm()));
    EXPECT_LT((fv - d.v_dot).norm(), 1e-4 * std::max(1.0, d.v_dot.norm()));
    EXPECT_EQ(n.R, s.R);
    EXPECT_EQ(n.T, s.T);
  }
}

TEST(Dynamics, RotationAndThrustChannels) {
  const VehicleParams vp;
  VehicleState s = hover_state();
  RateThrustInput u;
  u.omega = Vec3(0.2, -0.1, 0.4);
  u.tau = 3.0;
  const StateDerivative d = dynamics(s, u, vp);
  EXPECT_TRUE(d.R_dot.isApprox(s.R * hat(u.omega)));
  EXPECT_EQ(d.T_dot, 3.0);
}

TEST(Step, HoverIsAnEquilibrium) {
  const VehicleParams vp;
  const VehicleState s = hover_state();
  for (double dt : {1e-3, 0.01, 0.1, 1.0}) {
    const VehicleState n = step(s, {}, vp, dt);
    EXPECT_LT(n.x.norm(), 1e-12);
    EXPECT_LT(n.v.norm(), 1e-12);
    EXPECT_LT((n.R - s.R).norm(), 1e-12);
    EXPECT_NEAR(n.T, s.T, 1e-12);
  }
}

TEST(Step, YawRateGivesRotZ) {
  const VehicleParams vp;
  VehicleState s = hover_state();
  RateThrustInput u;
  u.omega = Vec3(0, 0, 0.7);
  const VehicleState n = step(s, u, vp, 0.01);
  EXPECT_LT((n.R - rot_z(0.007)).norm(), 1e-15);
}

TEST(Step, ThrustIsLinearInTau) {
  VehicleState s;
  s.T = 5.0;
  RateThrustInput u;
  u.tau = 1.0;
  EXPECT_NEAR(step(s, u, {}, 0.01).T, 5.01, 1e-15);
}

TEST(Step, RejectsNonPositiveDt) {
  EXPECT_THROW(step(hover_state(), {}, {}, 0.0), std::invalid_argument);
  EXPECT_THROW(step(hover_state(), {}, {}, -0.01), std::invalid_argument);
}

TEST(Step, FreeFallIsExact) {
  const VehicleParams vp;
  VehicleState s;  // T = 0, R = I, at rest
  for (int i = 0; i < 100; ++i) s = step(s, {}, vp, 0.01);
  EXPECT_NEAR(s.v.z(), vp.gravity * 1.0, 1e-8);
  EXPECT_NEAR(s.x.z(), 0.5 * vp.gravity, 1e-8);
  EXPECT_LT(s.v.head<2>().norm(), 1e-15);
}

TEST(Step, ThrustRampMatchesClosedForm) {
  // With R = I and T(t) = T0 + tau t the vertical motion is a cubic, which RK4
  // integrates exactly.
  const VehicleParams vp;
  VehicleState s;
  s.T = 20.0;
  RateThrustInput u;
  u.tau = 4.0;
  const double dt = 0.01;
  for (int i = 0; i < 100; ++i) s = step(s, u, vp, dt);
  const double t = 1.0;
  const double vz = vp.gravity * t - (20.0 * t + 2.0 * t * t) / vp.mass;
  const double z = 0.5 * vp.gravity * t * t - (10.0 * t * t + 4.0 / 6.0 * t * t * t) / vp.mass;
  EXPECT_NEAR(s.v.z(), vz, 1e-12);
  EXPECT_NEAR(s.x.z(), z, 1e-12);
}

TEST(Integrator, OrthonormalityOverManySteps) {
  const VehicleParams vp;
  Integrator integ(vp);
  std::mt19937_64 rng(99);
  VehicleState s = hover_state();
  for (int i = 0; i < 100000; ++i) {
    RateThrustInput u;
    u.omega = oracle::uniform3(rng, -3, 3);
    u.tau = oracle::uniform(rng, -5, 5);
    s = integ.advance(s, u, 0.01);
    // Keep the state bounded so the test exercises rotation drift only.
    s.x.setZero();
    s.v.setZero();
    s.T = std::clamp(s.T, 0.0, 60.0);
  }
  EXPECT_EQ(integ.steps(), 100000);
  EXPECT_LT((s.R.transpose() * s.R - Mat3::Identity()).norm(), 1e-6);
  EXPECT_NEAR(s.R.determinant(), 1.0, 1e-9);
}

TEST(Orthonormalize, RepairsPerturbedMatrix) {
  Mat3 R = rot_x(0.4) * rot_z(1.1);
  R(0, 1) += 1e-4;
  R(2, 2) -= 3e-5;
  EXPECT_FALSE(is_rotation(R));
  const Mat3 fixed = orthonormalize(R);
  EXPECT_TRUE(is_rotation(fixed, 1e-12));
  EXPECT_LT((fixed.col(2) - R.col(2).normalized()).norm(), 1e-15);
}

TEST(IsFinite, DetectsNaN) {
  VehicleState s = hover_state();
  EXPECT_TRUE(is_finite(s));
  s.v.y() = std::nan("");
  EXPECT_FALSE(is_finite(s));
}

}  // namespace
}  // namespace ccbf
