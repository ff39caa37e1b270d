#include "ccbf/composite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace ccbf {

void CompositeParams::validate() const {
  if (!(kappa > 0.0) || !(gamma > 0.0) || !(alpha1 > 0.0)) {
    throw std::invalid_argument("kappa, gamma and alpha1 must be positive");
  }
}

namespace {

// Neumaier-compensated accumulator; `merge` is an exact two-sum of partials.
template <typename T>
struct CompensatedSum {
  T sum;
  T comp;

  static CompensatedSum zero() {
    if constexpr (std::is_same_v<T, double>) {
      return {0.0, 0.0};
    } else {
      return {T::Zero(), T::Zero()};
    }
  }

  static void add_scalar(double& s, double& c, double x) {
    const double t = s + x;
    if (std::abs(s) >= std::abs(x)) {
      c += (s - t) + x;
    } else {
      c += (x - t) + s;
    }
    s = t;
  }

  void add(const T& x) {
    if constexpr (std::is_same_v<T, double>) {
      add_scalar(sum, comp, x);
    } else {
      for (Eigen::Index i = 0; i < x.size(); ++i) add_scalar(sum(i), comp(i), x(i));
    }
  }

  void merge(const CompensatedSum& other) {
    add(other.sum);
    comp += other.comp;
  }

  T value() const { return sum + comp; }
};

// Runs fn(chunk_index) for every chunk, spread over `threads` workers.
template <typename Fn>
void for_each_chunk(std::size_t chunks, int threads, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(std::max(threads, 1), chunks);
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) fn(c);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t c = w; c < chunks; c += workers) fn(c);
    });
  }
  for (auto& t : pool) t.join();
}

// Pairwise tree reduction in fixed index order.
template <typename Acc>
Acc pairwise_reduce(std::vector<Acc> parts) {
  while (parts.size() > 1) {
    std::vector<Acc> next;
    next.reserve((parts.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < parts.size(); i += 2) {
      Acc a = parts[i];
      a.merge(parts[i + 1]);
      next.push_back(a);
    }
    if (parts.size() % 2 == 1) next.push_back(parts.back());
    parts = std::move(next);
  }
  return parts.front();
}

struct DerivativeSums {
  CompensatedSum<double> lambda = CompensatedSum<double>::zero();
  CompensatedSum<double> weight = CompensatedSum<double>::zero();
  CompensatedSum<double> lf = CompensatedSum<double>::zero();
  CompensatedSum<Vec4> lg = CompensatedSum<Vec4>::zero();
  CompensatedSum<Vec3> x_hat = CompensatedSum<Vec3>::zero();

  void merge(const DerivativeSums& o) {
    lambda.merge(o.lambda);
    weight.merge(o.weight);
    lf.merge(o.lf);
    lg.merge(o.lg);
    x_hat.merge(o.x_hat);
  }
};

struct SoftMin {
  double shift;    // max_i(-kappa t_i)
  double log_sum;  // log sum_i exp(-kappa t_i - shift)

  double h1(const CompositeParams& cp) const {
    return -(cp.gamma / cp.kappa) * (shift + log_sum);
  }
};

SoftMin soft_min(std::span<const double> saturated, const CompositeParams& cp,
                 int threads) {
  double shift = -std::numeric_limits<double>::infinity();
  for (double t : saturated) shift = std::max(shift, -cp.kappa * t);

  const std::size_t n = saturated.size();
  const std::size_t chunks = (n + kCompositeChunk - 1) / kCompositeChunk;
  std::vector<CompensatedSum<double>> parts(chunks, CompensatedSum<double>::zero());
  for_each_chunk(chunks, threads, [&](std::size_t c) {
    const std::size_t end = std::min(n, (c + 1) * kCompositeChunk);
    for (std::size_t i = c * kCompositeChunk; i < end; ++i) {
      parts[c].add(std::exp(-cp.kappa * saturated[i] - shift));
    }
  });
  return {shift, std::log(pairwise_reduce(std::move(parts)).value())};
}

}  // namespace

std::vector<ChainValues> evaluate_chains(const VehicleState& s,
                                         const ObstacleMap& obstacles,
                                         const ChainParams& cp,
                                         const VehicleParams& vp) {
  const ChainContext ctx(s, vp);
  ChainParams local = cp;
  local.epsilon = obstacles.epsilon;
  std::vector<ChainValues> chains;
  chains.reserve(obstacles.size());
  for (const Vec3& p : obstacles.points) chains.push_back(chain_eval(ctx, p, local));
  return chains;
}

BarrierEvaluation compose(std::vector<ChainValues> chains,
                          const ObstacleMap& obstacles,
                          [[maybe_unused]] const VehicleState& s,
                          const CompositeParams& cp, int threads) {
  if (chains.empty()) throw EmptyCompositeError();
  if (chains.size() != obstacles.size()) {
    throw std::invalid_argument("compose: chain count differs from obstacle count");
  }
  const std::size_t n = chains.size();

  std::vector<double> saturated(n);
  for (std::size_t i = 0; i < n; ++i) saturated[i] = std::tanh(chains[i].nu2 / cp.gamma);
  const SoftMin sm = soft_min(saturated, cp, threads);

  BarrierEvaluation eval;
  eval.h1 = sm.h1(cp);
  eval.lambda.resize(n);

  const std::size_t chunks = (n + kCompositeChunk - 1) / kCompositeChunk;
  std::vector<DerivativeSums> parts(chunks);
  for_each_chunk(chunks, threads, [&](std::size_t c) {
    DerivativeSums& acc = parts[c];
    const std::size_t end = std::min(n, (c + 1) * kCompositeChunk);
    for (std::size_t i = c * kCompositeChunk; i < end; ++i) {
      // lambda_i = exp(-kappa (t_i - h1/gamma)), written through the shift.
      const double lambda = std::exp(-cp.kappa * saturated[i] - sm.shift - sm.log_sum);
      const double w = lambda * (1.0 - saturated[i] * saturated[i]);
      eval.lambda[i] = lambda;
      acc.lambda.add(lambda);
      acc.weight.add(w);
      acc.lf.add(w * chains[i].lf_nu2);
      acc.lg.add(w * chains[i].lg_nu2);
      acc.x_hat.add(w * obstacles.points[i]);
    }
  });
  const DerivativeSums total = pairwise_reduce(std::move(parts));

  eval.lf_h1 = total.lf.value();
  eval.lg_h1 = total.lg.value();
  eval.x_hat = total.x_hat.value();
  eval.weight_sum = total.weight.value();
  eval.chains = std::move(chains);
  return eval;
}

BarrierEvaluation evaluate_composite(const VehicleState& s,
                                     const ObstacleMap& obstacles,
                                     const ChainParams& chain,
                                     const CompositeParams& cp,
                                     const VehicleParams& vp, int threads) {
  return compose(evaluate_chains(s, obstacles, chain, vp), obstacles, s, cp,
                 threads);
}

double composite_value(const VehicleState& s, const ObstacleMap& obstacles,
                       const ChainParams& chain, const CompositeParams& cp,
                       const VehicleParams& vp) {
  if (obstacles.empty()) throw EmptyCompositeError();
  const ChainContext ctx(s, vp);
  ChainParams local = chain;
  local.epsilon = obstacles.epsilon;
  std::vector<double> saturated(obstacles.size());
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    saturated[i] = std::tanh(chain_eval(ctx, obstacles.points[i], local).nu2 / cp.gamma);
  }
  return soft_min(saturated, cp, 1).h1(cp);
}

NumericLieDerivatives compose_numeric(const ObstacleMap& obstacles,
                                      const VehicleState& s,
                                      const CompositeParams& cp,
                                      const ChainParams& chain,
                                      const VehicleParams& vp, double step) {
  if (obstacles.empty()) throw EmptyCompositeError();
  const auto h = [&](const VehicleState& st) {
    return composite_value(st, obstacles, chain, cp, vp);
  };

  NumericLieDerivatives out;

  // Drift flow: x' = v, v' = a, R and T constant.
  const Vec3 a = acceleration(s, vp);
  const double flow_scale = std::max({1.0, s.v.norm(), a.norm()});
  const double dt = step * std::max(1.0, s.x.norm()) / flow_scale;
  {
    VehicleState fwd = s;
    VehicleState bwd = s;
    fwd.x += dt * s.v;
    fwd.v += dt * a;
    bwd.x -= dt * s.v;
    bwd.v -= dt * a;
    out.lf_h1 = (h(fwd) - h(bwd)) / (2.0 * dt);
  }

  // Body-rate channels: R' = R hat(e_j).
  for (int j = 0; j < 3; ++j) {
    VehicleState fwd = s;
    VehicleState bwd = s;
    const Vec3 axis = Vec3::Unit(j);
    fwd.R = s.R * rotation_exp(step * axis);
    bwd.R = s.R * rotation_exp(-step * axis);
    out.lg_h1(j) = (h(fwd) - h(bwd)) / (2.0 * step);
  }

  // Thrust-rate channel: T' = tau.
  {
    const double dT = step * std::max(1.0, std::abs(s.T));
    VehicleState fwd = s;
    VehicleState bwd = s;
    fwd.T += dT;
    bwd.T -= dT;
    out.lg_h1(3) = (h(fwd) - h(bwd)) / (2.0 * dT);
  }
  return out;
}

VirtualObstacleGeometry virtual_obstacle_geometry(const BarrierEvaluation& eval,
                                                  const VehicleState& s) {
  VirtualObstacleGeometry g;
  if (!(eval.weight_sum > 0.0)) return g;
  const Vec3 rel = s.x - eval.x_hat / eval.weight_sum;
  const Vec3 axis = s.thrust_axis();
  g.above = s.T > 0.0 && rel.dot(axis) > 0.0;
  g.colinearity = rel.cross(axis).norm();
  const double len = rel.norm();
  g.normalized_colinearity = len > 0.0 ? g.colinearity / len : 0.0;
  return g;
}

}  // namespace ccbf
