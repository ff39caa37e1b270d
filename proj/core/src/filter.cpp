#include "ccbf/filter.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>

namespace ccbf {

namespace {

constexpr int kMaxVars = 5;
constexpr int kMaxRows = 3;

using VecN = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxVars, 1>;
using MatN = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxVars, kMaxVars>;
using RowsN = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxRows, kMaxVars>;
using VecM = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxRows, 1>;

struct SmallQpSolution {
  VecN z;
  VecM mu;
  unsigned active = 0;
  double objective = 0.0;
};

// min (z - z_ref)^T H (z - z_ref) s.t. G z >= h, by enumerating active sets.
// Returns nullopt when no active set yields a feasible KKT point.
std::optional<SmallQpSolution> solve_by_enumeration(const MatN& H, const VecN& z_ref,
                                                    const RowsN& G, const VecM& h) {
  const int n = static_cast<int>(z_ref.size());
  const int m = static_cast<int>(G.rows());
  const MatN H_inv = H.llt().solve(MatN::Identity(n, n));

  // Per-row tolerance, so a vacuous row with a huge bound does not loosen the
  // others.
  VecM row_tol(m);
  for (int i = 0; i < m; ++i) {
    row_tol(i) = 1e-10 * (1.0 + std::abs(h(i)) + std::abs(G.row(i).dot(z_ref)));
  }

  std::optional<SmallQpSolution> best;
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    std::array<int, kMaxRows> rows{};
    int k = 0;
    for (int i = 0; i < m; ++i) {
      if (mask & (1u << i)) rows[k++] = i;
    }

    SmallQpSolution cand;
    cand.z = z_ref;
    cand.mu = VecM::Zero(m);
    cand.active = mask;
    if (k > 0) {
      RowsN Gw(k, n);
      VecM hw(k);
      for (int r = 0; r < k; ++r) {
        Gw.row(r) = G.row(rows[r]);
        hw(r) = h(rows[r]);
      }
      // Stationarity 2H(z - z_ref) = Gw^T mu, with Gw z = hw.
      const MatN M = Gw * H_inv * Gw.transpose();
      Eigen::FullPivLU<MatN> lu(M);
      lu.setThreshold(1e-12);
      if (lu.rank() < k) continue;
      VecM half_mu = lu.solve(hw - Gw * z_ref);
      cand.z = z_ref + H_inv * Gw.transpose() * half_mu;
      // A large slack weight next to nearly parallel rows makes M poorly
      // conditioned; two refinement passes restore Gw z = hw to rounding level.
      for (int pass = 0; pass < 2; ++pass) {
        const VecM delta = lu.solve(hw - Gw * cand.z);
        half_mu += delta;
        cand.z += H_inv * Gw.transpose() * delta;
      }
      for (int r = 0; r < k; ++r) cand.mu(rows[r]) = 2.0 * half_mu(r);
    }
    if (m > 0) {
      const double mu_tol = 1e-10 * (1.0 + cand.mu.cwiseAbs().maxCoeff());
      if ((cand.mu.array() < -mu_tol).any()) continue;
      if (((G * cand.z - h).array() < -row_tol.array()).any()) continue;
    }
    const VecN dz = cand.z - z_ref;
    cand.objective = dz.dot(H * dz);
    if (!best || cand.objective < best->objective - 1e-14 * (1.0 + best->objective)) {
      best = cand;
    }
  }
  if (best) best->mu = best->mu.cwiseMax(0.0);
  return best;
}

void check_finite(const FilterProblem& p) {
  if (!p.u_ref.allFinite() || !p.P.allFinite() || !p.A.allFinite() ||
      !p.b.allFinite() || !std::isfinite(p.slack_weight)) {
    throw NonFiniteProblem("filter problem contains non-finite values");
  }
  if (p.A.rows() != p.b.rows() || p.A.rows() < 1) {
    throw std::invalid_argument("filter problem needs matching A and b rows");
  }
}

FilterResult to_result(const FilterProblem& p, const SmallQpSolution& sol) {
  FilterResult r;
  r.u_safe = sol.z.head<4>();
  const Vec4 du = r.u_safe - p.u_ref;
  r.cost = std::max(0.0, du.dot(p.P * du));
  const int thrust = p.thrust_row();
  if (p.has_collision_row) {
    r.collision_active = (sol.active & 1u) != 0;
    r.multipliers(0) = sol.mu(0);
  }
  r.thrust_active = (sol.active & (1u << thrust)) != 0;
  r.multipliers(1) = sol.mu(thrust);
  return r;
}

std::optional<FilterResult> solve_hard(const FilterProblem& p) {
  const MatN H = p.P;
  const VecN z_ref = p.u_ref;
  const RowsN G = p.A;
  const VecM h = p.b;
  const auto sol = solve_by_enumeration(H, z_ref, G, h);
  if (!sol) return std::nullopt;
  return to_result(p, *sol);
}

}  // namespace

FilterResult solve(const FilterProblem& p) {
  check_finite(p);
  if (auto r = solve_hard(p)) return *r;
  return slack_fallback(p);
}

FilterResult slack_fallback(const FilterProblem& p) {
  check_finite(p);
  if (auto r = solve_hard(p)) return *r;

  // z = [u; s]: collision row hard, thrust row relaxed by s, and s >= 0.
  const int m = p.rows();
  MatN H = MatN::Zero(5, 5);
  H.topLeftCorner<4, 4>() = p.P;
  H(4, 4) = p.slack_weight;
  VecN z_ref = VecN::Zero(5);
  z_ref.head<4>() = p.u_ref;
  RowsN G = RowsN::Zero(m + 1, 5);
  VecM h = VecM::Zero(m + 1);
  for (int i = 0; i < m; ++i) {
    G.row(i).head<4>() = p.A.row(i);
    h(i) = p.b(i);
  }
  G(p.thrust_row(), 4) = 1.0;
  G(m, 4) = 1.0;

  FilterResult r;
  if (const auto sol = solve_by_enumeration(H, z_ref, G, h)) {
    r = to_result(p, *sol);
    r.slack = std::max(0.0, sol->z(4));
  } else {
    // Collision row alone is infeasible (zero regressor with positive bound):
    // honour the thrust row and report the collision row as violated.
    FilterProblem thrust_only = p;
    thrust_only.has_collision_row = false;
    thrust_only.A = p.A.bottomRows(1);
    thrust_only.b = p.b.bottomRows(1);
    r = *solve_hard(thrust_only);
  }
  r.relaxed = true;
  return r;
}

KktResiduals kkt_residuals(const FilterProblem& p, const FilterResult& r) {
  KktResiduals k;
  const int m = p.rows();
  VecM mu(m);
  VecM slack = VecM::Zero(m);
  if (p.has_collision_row) mu(0) = r.multipliers(0);
  mu(p.thrust_row()) = r.multipliers(1);
  slack(p.thrust_row()) = r.slack;

  const Vec4 grad = 2.0 * p.P * (r.u_safe - p.u_ref) - p.A.transpose() * mu;
  k.stationarity = grad.norm();
  const VecM gap = p.A * r.u_safe - p.b + slack;
  k.primal = std::max(0.0, -gap.minCoeff());
  k.complementarity = mu.cwiseProduct(gap).cwiseAbs().maxCoeff();
  k.min_multiplier = mu.minCoeff();
  return k;
}

bool singularity_monitor(const BarrierEvaluation& eval, const VehicleState& s,
                         double tol) {
  if (!eval.has_collision_row()) return false;
  const VirtualObstacleGeometry g = virtual_obstacle_geometry(eval, s);
  return g.above && g.normalized_colinearity < tol;
}

FilterSetup build_problem(const VehicleState& s, const ObstacleMap& obstacles,
                          const RateThrustInput& u_ref, const FilterParams& fp) {
  FilterSetup setup;
  if (!obstacles.empty()) {
    setup.eval = evaluate_composite(s, obstacles, fp.chain, fp.composite,
                                    fp.vehicle, fp.threads);
  } else {
    setup.eval.h1 = std::numeric_limits<double>::infinity();
  }
  setup.eval.thrust = thrust_barrier(s, fp.thrust);

  FilterProblem& p = setup.problem;
  p.u_ref = u_ref.as_vector();
  p.P = fp.P;
  p.slack_weight = fp.slack_weight;
  p.has_collision_row = !obstacles.empty();
  const int rows = p.has_collision_row ? 2 : 1;
  p.A.resize(rows, 4);
  p.b.resize(rows);
  if (p.has_collision_row) {
    p.A.row(0) = setup.eval.lg_h1.transpose();
    p.b(0) = -setup.eval.lf_h1 - fp.composite.alpha1 * setup.eval.h1;
  }
  p.A.row(rows - 1) = setup.eval.thrust.lg_h2.transpose();
  p.b(rows - 1) = setup.eval.thrust.b2;
  return setup;
}

FilterStepOutput filter_step(const VehicleState& s, const ObstacleMap& obstacles,
                             const RateThrustInput& u_ref,
                             const FilterParams& fp) {
  FilterSetup setup = build_problem(s, obstacles, u_ref, fp);
  FilterStepOutput out;
  out.result = solve(setup.problem);
  out.result.singular = singularity_monitor(setup.eval, s, fp.singular_tol);
  out.u_safe = RateThrustInput::from_vector(out.result.u_safe);
  out.eval = std::move(setup.eval);
  return out;
}

}  // namespace ccbf
