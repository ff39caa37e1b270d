#pragma once

// Reference implementations used only by the tests. They are written directly
// from the definitions, without the precomputation and compensated sums of the
// library, so agreement between the two is meaningful.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "ccbf/vehicle.hpp"

namespace ccbf::oracle {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vec3 uniform3(std::mt19937_64& rng, double lo, double hi) {
  return {uniform(rng, lo, hi), uniform(rng, lo, hi), uniform(rng, lo, hi)};
}

inline Mat3 random_rotation(std::mt19937_64& rng, double max_tilt = M_PI) {
  Vec3 axis = uniform3(rng, -1, 1);
  if (axis.norm() < 1e-6) axis = Vec3::UnitZ();
  return Eigen::AngleAxisd(uniform(rng, -max_tilt, max_tilt), axis.normalized())
      .toRotationMatrix();
}

// A flying state: moderate speed, tilt below ~60 deg, thrust around hover.
inline VehicleState random_state(std::mt19937_64& rng,
                                 const VehicleParams& vp = {}) {
  VehicleState s;
  s.x = uniform3(rng, -3, 3);
  s.v = uniform3(rng, -2, 2);
  s.R = Eigen::AngleAxisd(uniform(rng, -M_PI, M_PI), Vec3::UnitZ())
            .toRotationMatrix() *
        random_rotation(rng, 1.0);
  s.T = vp.hover_thrust() * uniform(rng, 0.5, 1.6);
  return s;
}

inline std::vector<Vec3> random_points(std::mt19937_64& rng, int n,
                                       const Vec3& center, double half) {
  std::vector<Vec3> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) pts.push_back(center + uniform3(rng, -half, half));
  return pts;
}

struct Chain {
  double nu0, nu1, nu2;
};

// nu2 through the expanded form Lf^2 nu0 - (p0 + p1) Lf nu0 + p0 p1 nu0.
inline Chain chain_expanded(const VehicleState& s, const Vec3& xi, double p0,
                            double p1, double eps, const VehicleParams& vp) {
  const Vec3 d = s.x - xi;
  const Vec3 a = vp.gravity * Vec3::UnitZ() - (s.T / vp.mass) * s.R.col(2);
  const double nu0 = d.squaredNorm() - eps * eps;
  const double lf0 = 2.0 * d.dot(s.v);
  const double lf2 = 2.0 * s.v.dot(s.v) + 2.0 * d.dot(a);
  return {nu0, lf0 - p0 * nu0, lf2 - (p0 + p1) * lf0 + p0 * p1 * nu0};
}

// Plain log-sum-exp without any shift. Only valid for moderate kappa.
inline double h1_direct(const std::vector<double>& nu2, double kappa,
                        double gamma) {
  double sum = 0.0;
  for (double n : nu2) sum += std::exp(-kappa * std::tanh(n / gamma));
  return -(gamma / kappa) * std::log(sum);
}

// State after flowing for dt along the drift (u = 0), first order in dt is all
// a central difference needs, but a 4th-order step keeps the error at dt^5.
inline VehicleState flow(const VehicleState& s, double dt,
                         const VehicleParams& vp) {
  auto deriv = [&](const Vec3& v, const Mat3& R, double T) {
    return std::pair<Vec3, Vec3>{v, vp.gravity * Vec3::UnitZ() -
                                        (T / vp.mass) * R.col(2)};
  };
  // R and T are constant under the drift.
  const auto [k1x, k1v] = deriv(s.v, s.R, s.T);
  const auto [k2x, k2v] = deriv(s.v + 0.5 * dt * k1v, s.R, s.T);
  const auto [k3x, k3v] = deriv(s.v + 0.5 * dt * k2v, s.R, s.T);
  const auto [k4x, k4v] = deriv(s.v + dt * k3v, s.R, s.T);
  VehicleState out = s;
  out.x += dt / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x);
  out.v += dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
  return out;
}

// Perturbation along input channel j in [0, 4): body rate (right-multiplied
// rotation) or thrust.
inline VehicleState nudge(const VehicleState& s, int j, double h) {
  VehicleState out = s;
  if (j < 3) {
    out.R = s.R * Eigen::AngleAxisd(h, Vec3::Unit(j)).toRotationMatrix();
  } else {
    out.T += h;
  }
  return out;
}

struct QpOracleResult {
  Eigen::Vector4d u;
  double cost = 0.0;
  int iterations = 0;
};

// Projected gradient ascent on the dual of
//   min (u - r)^T P (u - r)  s.t.  A u >= b.
// u(mu) = r + P^{-1} A^T mu / 2, dual gradient b - A u(mu), projection mu >= 0.
inline QpOracleResult qp_projected_gradient(const Eigen::Matrix4d& P,
                                            const Eigen::MatrixXd& A,
                                            const Eigen::VectorXd& b,
                                            const Eigen::Vector4d& r,
                                            int max_iter = 100000,
                                            double step = 1e-3) {
  const Eigen::Matrix4d Pinv = P.inverse();
  const Eigen::MatrixXd G = 0.5 * A * Pinv * A.transpose();
  // A fixed 1e-3 step is far too slow for well-scaled rows; 1/L is the largest
  // step with guaranteed monotone progress.
  const double L = G.selfadjointView<Eigen::Lower>().eigenvalues().maxCoeff();
  const double eta = L > 0 ? 1.0 / L : step;
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(A.rows());
  auto u_of = [&](const Eigen::VectorXd& m) -> Eigen::Vector4d {
    return r + 0.5 * Pinv * A.transpose() * m;
  };
  QpOracleResult out;
  for (out.iterations = 0; out.iterations < max_iter; ++out.iterations) {
    const Eigen::VectorXd grad = b - A * u_of(mu);
    Eigen::VectorXd next = (mu + eta * grad).cwiseMax(0.0);
    const double change = (next - mu).lpNorm<Eigen::Infinity>();
    mu = next;
    if (change < 1e-15 * std::max(1.0, mu.lpNorm<Eigen::Infinity>())) break;
  }
  out.u = u_of(mu);
  out.cost = (out.u - r).dot(P * (out.u - r));
  return out;
}

}  // namespace ccbf::oracle
