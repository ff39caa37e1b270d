#include "ccbf/barrier.hpp"

#include <cmath>
#include <stdexcept>

namespace ccbf {

void ChainParams::validate() const {
  if (!(p0 < 0.0) || !(p1 < 0.0)) {
    throw std::invalid_argument("chain poles p0, p1 must be negative");
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
}

void ThrustBarrierParams::validate() const {
  if (!(epsilon_T >= 0.0)) throw std::invalid_argument("epsilon_T must be >= 0");
  if (!(alpha2 > 0.0)) throw std::invalid_argument("alpha2 must be positive");
}

ChainContext::ChainContext(const VehicleState& s, const VehicleParams& vp)
    : x(s.x),
      v(s.v),
      a(acceleration(s, vp)),
      R(s.R),
      thrust_over_mass(s.T / vp.mass),
      inv_mass(1.0 / vp.mass),
      v_dot_v(s.v.squaredNorm()),
      v_dot_a(s.v.dot(a)) {}

ChainValues chain_eval(const ChainContext& ctx, const Vec3& obstacle,
                       const ChainParams& cp) {
  const Vec3 d = ctx.x - obstacle;
  const double d_dot_v = d.dot(ctx.v);
  const double d_dot_a = d.dot(ctx.a);

  const double lf_nu0 = 2.0 * d_dot_v;
  const double lf2_nu0 = 2.0 * ctx.v_dot_v + 2.0 * d_dot_a;
  // Third drift derivative; the drift leaves a constant since R and T are
  // input-driven only.
  const double lf3_nu0 = 6.0 * ctx.v_dot_a;

  ChainValues c;
  c.nu0 = d.squaredNorm() - cp.epsilon * cp.epsilon;
  c.nu1 = lf_nu0 - cp.p0 * c.nu0;
  const double lf_nu1 = lf2_nu0 - cp.p0 * lf_nu0;
  c.nu2 = lf_nu1 - cp.p1 * c.nu1;
  const double lf2_nu1 = lf3_nu0 - cp.p0 * lf2_nu0;
  c.lf_nu2 = lf2_nu1 - cp.p1 * lf_nu1;

  // Input enters only through d(a)/dt = -(1/m)(tau R e3 - T R [e3]x Omega).
  const Vec3 b = ctx.R.transpose() * d;
  const double k = 2.0 * ctx.thrust_over_mass;
  c.lg_nu2 = Vec4(k * b.y(), -k * b.x(), 0.0, -2.0 * ctx.inv_mass * b.z());
  return c;
}

ChainValues chain_eval(const VehicleState& s, const Vec3& obstacle,
                       const ChainParams& cp, const VehicleParams& vp) {
  return chain_eval(ChainContext(s, vp), obstacle, cp);
}

ThrustBarrierValues thrust_barrier(const VehicleState& s,
                                   const ThrustBarrierParams& tp) {
  ThrustBarrierValues t;
  t.h2 = s.T - tp.epsilon_T;
  t.lf_h2 = 0.0;
  t.lg_h2 = Vec4(0.0, 0.0, 0.0, 1.0);
  t.b2 = -tp.alpha2 * t.h2 - t.lf_h2;
  return t;
}

}  // namespace ccbf
