#pragma once

#include <Eigen/Dense>

#include "ccbf/barrier.hpp"
#include "ccbf/composite.hpp"
#include "ccbf/obstacles.hpp"
#include "ccbf/vehicle.hpp"

namespace ccbf {

// At most two stacked rows: collision (lg_h1) first, thrust (lg_h2) last.
using ConstraintMatrix = Eigen::Matrix<double, Eigen::Dynamic, 4, Eigen::RowMajor, 2, 4>;
using ConstraintVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 2, 1>;

// min (u - u_ref)^T P (u - u_ref)  s.t.  A u >= b
struct FilterProblem {
  Vec4 u_ref = Vec4::Zero();
  Mat4 P = Mat4::Identity();
  ConstraintMatrix A;
  ConstraintVector b;
  bool has_collision_row = true;  // false when the obstacle set is empty
  double slack_weight = 1e6;

  int rows() const { return static_cast<int>(A.rows()); }
  int thrust_row() const { return rows() - 1; }
};

struct FilterResult {
  Vec4 u_safe = Vec4::Zero();
  bool collision_active = false;
  bool thrust_active = false;
  double slack = 0.0;  // relaxation of the thrust row
  double cost = 0.0;   // (u - u_ref)^T P (u - u_ref)
  bool singular = false;  // singularity monitor verdict (set by filter_step)
  bool relaxed = false;   // slack fallback engaged
  Eigen::Vector2d multipliers = Eigen::Vector2d::Zero();  // [collision, thrust]
};

class NonFiniteProblem : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Exact solution by enumerating the active sets of the two rows. Falls back to
// slack_fallback when no active set is primal feasible.
FilterResult solve(const FilterProblem& p);

// Hard solve when feasible; otherwise the thrust row gets a slack s >= 0 with
// penalty slack_weight * s^2 while the collision row stays hard.
FilterResult slack_fallback(const FilterProblem& p);

struct KktResiduals {
  double stationarity = 0.0;     // |2P(u - u_ref) - A^T mu|
  double primal = 0.0;           // max violation of A u >= b - [0, slack]
  double complementarity = 0.0;  // max |mu_i (A_i u - b_i + slack_i)|
  double min_multiplier = 0.0;
};

KktResiduals kkt_residuals(const FilterProblem& p, const FilterResult& r);

bool singularity_monitor(const BarrierEvaluation& eval, const VehicleState& s,
                         double tol);

struct FilterParams {
  ChainParams chain;
  CompositeParams composite;
  ThrustBarrierParams thrust;
  VehicleParams vehicle;
  Mat4 P = Mat4::Identity();
  double singular_tol = 1e-3;  // on |(x - x_hat) x R e3| / |x - x_hat|
  double slack_weight = 1e6;
  int threads = 1;
};

// Evaluates the barriers and the stacked constraint rows without solving.
struct FilterSetup {
  BarrierEvaluation eval;
  FilterProblem problem;
};
FilterSetup build_problem(const VehicleState& s, const ObstacleMap& obstacles,
                          const RateThrustInput& u_ref, const FilterParams& fp);

struct FilterStepOutput {
  RateThrustInput u_safe;
  BarrierEvaluation eval;
  FilterResult result;
};

FilterStepOutput filter_step(const VehicleState& s, const ObstacleMap& obstacles,
                             const RateThrustInput& u_ref,
                             const FilterParams& fp);

}  // namespace ccbf
