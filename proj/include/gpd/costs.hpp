#pragma once

#include "gpd/bernstein.hpp"
#include "gpd/scene.hpp"

namespace gpd {

struct CostResult {
  double cost = 0.0;
  Eigen::MatrixXd gradient;  ///< d(cost)/d(waypoints), same shape as the trajectory
};

/**
 * Squared-hinge obstacle penalty summed over waypoints and obstacles:
 *   sum_k sum_o max(0, margin + r - sd_o(q_k))^2
 * where the workspace boundary counts as one more obstacle.
 * with its exact gradient. Throws std::invalid_argument if margin <= 0.
 */
CostResult collision_cost(const Trajectory& traj, const Scene& scene, double margin);

struct SmoothnessWeights {
  double accel = 1.0;      ///< weight on squared second differences
  double curvature = 1.0;  ///< weight on squared (1 - cos(turning angle))
};

/// Acceleration and curvature penalty; requires H >= 3.
CostResult curvature_accel_cost(const Trajectory& traj, const SmoothnessWeights& weights);

}  // namespace gpd
