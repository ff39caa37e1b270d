#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "ccbf/barrier.hpp"
#include "ccbf/obstacles.hpp"
#include "ccbf/vehicle.hpp"

namespace ccbf {

struct CompositeParams {
  double kappa = 20.0;  // soft-min sharpness
  double gamma = 40.0;  // tanh saturation scale
  double alpha1 = 1.0;  // 1/s

  void validate() const;
};

// Composite barrier h1 = -(gamma/kappa) log sum_i exp(-kappa tanh(nu2_i/gamma))
// and everything the filter and the diagnostics need from it.
struct BarrierEvaluation {
  double h1 = 0.0;
  double lf_h1 = 0.0;
  Vec4 lg_h1 = Vec4::Zero();
  std::vector<double> lambda;  // soft-min weights, sum to one
  Vec3 x_hat = Vec3::Zero();   // sum_i lambda_i sech^2(nu2_i/gamma) x_i
  double weight_sum = 0.0;     // sum_i lambda_i sech^2(nu2_i/gamma)
  std::vector<ChainValues> chains;
  ThrustBarrierValues thrust;

  bool has_collision_row() const { return !chains.empty(); }
};

class EmptyCompositeError : public std::invalid_argument {
 public:
  EmptyCompositeError()
      : std::invalid_argument("composite barrier needs at least one obstacle") {}
};

// Obstacles per reduction chunk. Chunk partials are combined pairwise in index
// order, so results do not depend on the thread count.
inline constexpr std::size_t kCompositeChunk = 256;

std::vector<ChainValues> evaluate_chains(const VehicleState& s,
                                         const ObstacleMap& obstacles,
                                         const ChainParams& cp,
                                         const VehicleParams& vp);

BarrierEvaluation compose(std::vector<ChainValues> chains,
                          const ObstacleMap& obstacles, const VehicleState& s,
                          const CompositeParams& cp, int threads = 1);

// Chains + compose in one call.
BarrierEvaluation evaluate_composite(const VehicleState& s,
                                     const ObstacleMap& obstacles,
                                     const ChainParams& chain,
                                     const CompositeParams& cp,
                                     const VehicleParams& vp, int threads = 1);

// h1 alone, without derivatives.
double composite_value(const VehicleState& s, const ObstacleMap& obstacles,
                       const ChainParams& chain, const CompositeParams& cp,
                       const VehicleParams& vp);

struct NumericLieDerivatives {
  double lf_h1 = 0.0;
  Vec4 lg_h1 = Vec4::Zero();
};

// Central differences of h1 along the drift flow and along each input channel
// (body rates through R exp(hat(e_j) d), thrust rate through T).
NumericLieDerivatives compose_numeric(const ObstacleMap& obstacles,
                                      const VehicleState& s,
                                      const CompositeParams& cp,
                                      const ChainParams& chain,
                                      const VehicleParams& vp,
                                      double step = 1e-6);

struct VirtualObstacleGeometry {
  bool above = false;                 // T > 0 and (x - x_hat) . R e3 > 0
  double colinearity = 0.0;           // |(x - x_hat) x R e3|
  double normalized_colinearity = 1;  // colinearity / |x - x_hat|
};

VirtualObstacleGeometry virtual_obstacle_geometry(const BarrierEvaluation& eval,
                                                  const VehicleState& s);

}  // namespace ccbf
