#pragma once

#include "ccbf/vehicle.hpp"

namespace ccbf {

// Poles of the exponential barrier chain and the clearance radius.
struct ChainParams {
  double p0 = -3.0;
  double p1 = -2.0;
  double epsilon = 0.5;  // m

  void validate() const;
};

// nu0 = |x - xi|^2 - eps^2, nu1 = Lf nu0 - p0 nu0, nu2 = Lf nu1 - p1 nu1, and
// the Lie derivatives of nu2, which has relative degree one in u = [p q r tau].
struct ChainValues {
  double nu0 = 0.0;
  double nu1 = 0.0;
  double nu2 = 0.0;
  double lf_nu2 = 0.0;
  Vec4 lg_nu2 = Vec4::Zero();  // lg_nu2(2) (yaw rate) is structurally zero
};

// State-only quantities shared by all obstacles of one evaluation.
struct ChainContext {
  Vec3 x;
  Vec3 v;
  Vec3 a;  // g e3 - (T/m) R e3
  Mat3 R;
  double thrust_over_mass;
  double inv_mass;
  double v_dot_v;
  double v_dot_a;

  ChainContext(const VehicleState& s, const VehicleParams& vp);
};

ChainValues chain_eval(const ChainContext& ctx, const Vec3& obstacle,
                       const ChainParams& cp);
ChainValues chain_eval(const VehicleState& s, const Vec3& obstacle,
                       const ChainParams& cp, const VehicleParams& vp);

// Relative-degree-one thrust barrier h2 = T - eps_T.
struct ThrustBarrierParams {
  double epsilon_T = 7.5;  // N
  double alpha2 = 5.0;     // 1/s

  void validate() const;
};

struct ThrustBarrierValues {
  double h2 = 0.0;
  double lf_h2 = 0.0;
  Vec4 lg_h2 = Vec4::UnitW();
  double b2 = 0.0;  // lower bound of lg_h2 . u
};

ThrustBarrierValues thrust_barrier(const VehicleState& s,
                                   const ThrustBarrierParams& tp);

}  // namespace ccbf
