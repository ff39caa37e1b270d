#include "checks.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ccbf/composite.hpp"
#include "ccbf/filter.hpp"
#include "ccbf/vehicle.hpp"

namespace ccbf::checks {

namespace {

using Rng = std::mt19937_64;

double uni(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Vec3 uni3(Rng& rng, double lo, double hi) {
  return Vec3(uni(rng, lo, hi), uni(rng, lo, hi), uni(rng, lo, hi));
}

VehicleState random_state(Rng& rng, const VehicleParams& vp) {
  VehicleState s;
  s.x = uni3(rng, -2.0, 2.0);
  s.v = uni3(rng, -1.5, 1.5);
  s.R = rotation_exp(uni3(rng, -0.6, 0.6));
  s.T = vp.hover_thrust() * uni(rng, 0.5, 1.6);
  return s;
}

ObstacleMap random_obstacles(Rng& rng, const Vec3& center, int n) {
  ObstacleMap m;
  while (static_cast<int>(m.points.size()) < n) {
    const Vec3 p = center + uni3(rng, -4.0, 4.0);
    if ((p - center).norm() > 0.8) m.points.push_back(p);
  }
  return m;
}

std::string describe(const VehicleState& s) {
  std::ostringstream os;
  os.precision(6);
  os << "x=[" << s.x.transpose() << "] v=[" << s.v.transpose() << "] T=" << s.T;
  return os.str();
}

CheckOutcome gradients(const CheckOptions& opts) {
  CheckOutcome out{"gradients", true, {}};
  Rng rng(opts.seed);
  const VehicleParams vp;
  const ChainParams chain;
  const CompositeParams cp;
  double worst = 0.0;
  for (int n : {1, 10, 400}) {
    for (int i = 0; i < opts.samples; ++i) {
      const VehicleState s = random_state(rng, vp);
      const ObstacleMap obs = random_obstacles(rng, s.x, n);
      BarrierEvaluation e = evaluate_composite(s, obs, chain, cp, vp);
      e.lf_h1 += opts.analytic_bias;
      const NumericLieDerivatives num = compose_numeric(obs, s, cp, chain, vp);
      Eigen::Matrix<double, 5, 1> a;
      Eigen::Matrix<double, 5, 1> f;
      a << e.lf_h1, e.lg_h1;
      f << num.lf_h1, num.lg_h1;
      const double rel = (a - f).norm() / std::max(a.norm(), 1.0);
      worst = std::max(worst, rel);
      if (!(rel < 1e-5)) {
        out.passed = false;
        std::ostringstream os;
        os << "N=" << n << " sample " << i << ": relative error " << rel
           << " at state " << describe(s);
        out.detail = os.str();
        return out;
      }
    }
  }
  std::ostringstream os;
  os << "worst relative error " << worst;
  out.detail = os.str();
  return out;
}

CheckOutcome weights(const CheckOptions& opts) {
  CheckOutcome out{"weights", true, {}};
  Rng rng(opts.seed + 1);
  const CompositeParams cp;
  for (int i = 0; i < opts.samples * 10; ++i) {
    const int n = 1 + static_cast<int>(uni(rng, 0.0, 500.0));
    std::vector<ChainValues> chains(static_cast<std::size_t>(n));
    ObstacleMap obs;
    double lo = std::numeric_limits<double>::infinity();
    for (auto& c : chains) {
      c.nu2 = uni(rng, -60.0, 200.0);
      lo = std::min(lo, cp.gamma * std::tanh(c.nu2 / cp.gamma));
      obs.points.push_back(uni3(rng, -5.0, 5.0));
    }
    const BarrierEvaluation e = compose(chains, obs, VehicleState{}, cp);
    double sum = 0.0;
    for (double l : e.lambda) sum += l;
    const double floor = lo - cp.gamma / cp.kappa * std::log(static_cast<double>(n));
    std::ostringstream os;
    if (std::abs(sum - 1.0) > 1e-9) {
      os << "batch " << i << ": sum of weights " << sum;
    } else if (e.h1 > lo + 1e-12 || e.h1 < floor - 1e-12) {
      os << "batch " << i << ": h1=" << e.h1 << " outside [" << floor << ", " << lo << "]";
    } else if (e.h1 >= 0.0 && lo < 0.0) {
      os << "batch " << i << ": h1 >= 0 with a negative constraint";
    }
    if (!os.str().empty()) {
      out.passed = false;
      out.detail = os.str();
      return out;
    }
  }
  out.detail = std::to_string(opts.samples * 10) + " batches";
  return out;
}

CheckOutcome qp(const CheckOptions& opts) {
  CheckOutcome out{"qp", true, {}};
  Rng rng(opts.seed + 2);
  for (int i = 0; i < opts.samples * 5; ++i) {
    FilterProblem p;
    p.u_ref = Vec4(uni(rng, -3, 3), uni(rng, -3, 3), uni(rng, -3, 3), uni(rng, -30, 30));
    const Vec4 d(uni(rng, 0.5, 3), uni(rng, 0.5, 3), uni(rng, 0.5, 3), uni(rng, 0.5, 3));
    p.P = d.asDiagonal();
    p.A.resize(2, 4);
    p.b.resize(2);
    p.A.row(0) = Vec4(uni(rng, -2, 2), uni(rng, -2, 2), 0.0, uni(rng, -1, 1)).transpose();
    p.A.row(1) = Vec4(0, 0, 0, 1).transpose();
    p.b = Eigen::Vector2d(uni(rng, -5, 5), uni(rng, -40, 40));
    const FilterResult r = solve(p);
    const KktResiduals k = kkt_residuals(p, r);
    if (k.stationarity > 1e-7 || k.primal > 1e-8 || k.complementarity > 1e-7 ||
        k.min_multiplier < 0.0) {
      std::ostringstream os;
      os << "instance " << i << ": KKT residuals stat=" << k.stationarity
         << " primal=" << k.primal << " comp=" << k.complementarity;
      out.passed = false;
      out.detail = os.str();
      return out;
    }
    // Minimality against random feasible points.
    for (int j = 0; j < 20; ++j) {
      const Vec4 trial = r.u_safe + Vec4(uni(rng, -1, 1), uni(rng, -1, 1),
                                         uni(rng, -1, 1), uni(rng, -5, 5));
      const Eigen::Vector2d gap = p.A * trial - p.b;
      if (r.relaxed || (gap.array() < 0.0).any()) continue;
      const Vec4 dv = trial - p.u_ref;
      if (r.cost > dv.dot(p.P * dv) + 1e-8) {
        out.passed = false;
        out.detail = "instance " + std::to_string(i) + ": feasible point with lower cost";
        return out;
      }
    }
  }
  out.detail = std::to_string(opts.samples * 5) + " instances";
  return out;
}

CheckOutcome dynamics(const CheckOptions& opts) {
  CheckOutcome out{"dynamics", true, {}};
  Rng rng(opts.seed + 3);
  const VehicleParams vp;
  Integrator integ(vp);
  VehicleState s;
  s.T = vp.hover_thrust();
  const int steps = opts.samples * 100;
  for (int i = 0; i < steps; ++i) {
    RateThrustInput u{uni3(rng, -2.0, 2.0), uni(rng, -1.0, 1.0)};
    s = integ.advance(s, u, 0.01);
    s.x.setZero();
    s.v.setZero();
  }
  const double err = (s.R.transpose() * s.R - Mat3::Identity()).norm();
  if (!(err < 1e-6)) {
    out.passed = false;
    out.detail = "orthonormality error " + std::to_string(err);
  } else {
    out.detail = std::to_string(steps) + " steps, |R^T R - I| = " + std::to_string(err);
  }
  return out;
}

}  // namespace

std::vector<std::string> suite_names() { return {"gradients", "weights", "qp", "dynamics"}; }

std::vector<CheckOutcome> run_suite(const std::string& name, const CheckOptions& opts) {
  if (name == "all") {
    std::vector<CheckOutcome> all;
    for (const auto& n : suite_names()) {
      auto r = run_suite(n, opts);
      all.insert(all.end(), r.begin(), r.end());
    }
    return all;
  }
  if (name == "gradients") return {gradients(opts)};
  if (name == "weights") return {weights(opts)};
  if (name == "qp") return {qp(opts)};
  if (name == "dynamics") return {dynamics(opts)};
  throw std::invalid_argument("unknown check suite '" + name + "'");
}

}  // namespace ccbf::checks
