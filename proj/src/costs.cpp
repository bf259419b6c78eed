#include "gpd/costs.hpp"

#include <stdexcept>

namespace gpd {

CostResult collision_cost(const Trajectory& traj, const Scene& scene, double margin) {
  if (!(margin > 0.0)) throw std::invalid_argument("collision_cost: margin must be > 0");
  CostResult out;
  out.gradient = Eigen::MatrixXd::Zero(traj.rows(), traj.cols());
  const double reach = margin + scene.robot_radius;
  Point g;
  for (Eigen::Index k = 0; k < traj.cols(); ++k) {
    const Point p = traj.col(k).head<2>();
    const double hw = reach - workspace_distance(scene.workspace, p, &g);
    if (hw > 0.0) {
      out.cost += hw * hw;
      out.gradient.col(k).head<2>() -= 2.0 * hw * g;
    }
    for (const auto& obstacle : scene.obstacles) {
      const double h = reach - obstacle_distance(obstacle, p, &g);
      if (h <= 0.0) continue;
      out.cost += h * h;
      out.gradient.col(k).head<2>() -= 2.0 * h * g;
    }
  }
  return out;
}

CostResult curvature_accel_cost(const Trajectory& traj, const SmoothnessWeights& weights) {
  const auto n = traj.cols();
  if (n < 3) throw std::invalid_argument("curvature_accel_cost: need at least 3 waypoints");
  CostResult out;
  out.gradient = Eigen::MatrixXd::Zero(traj.rows(), n);
  auto& grad = out.gradient;
  for (Eigen::Index k = 1; k + 1 < n; ++k) {
    const Eigen::VectorXd a = traj.col(k + 1) - 2.0 * traj.col(k) + traj.col(k - 1);
    out.cost += weights.accel * a.squaredNorm();
    grad.col(k - 1) += 2.0 * weights.accel * a;
    grad.col(k) -= 4.0 * weights.accel * a;
    grad.col(k + 1) += 2.0 * weights.accel * a;

    if (weights.curvature == 0.0) continue;
    const Eigen::VectorXd u = traj.col(k) - traj.col(k - 1);
    const Eigen::VectorXd v = traj.col(k + 1) - traj.col(k);
    const double uu = u.squaredNorm(), vv = v.squaredNorm();
    const double q = uu * vv;
    if (q < 1e-24) continue;  // degenerate: turning angle undefined
    const double s = std::sqrt(q);
    const double dot = u.dot(v);
    const double proxy = 1.0 - dot / s;  // 1 - cos(theta)
    out.cost += weights.curvature * proxy * proxy;
    const double s3 = s * q;
    const Eigen::VectorXd du = -v / s + dot * vv * u / s3;
    const Eigen::VectorXd dv = -u / s + dot * uu * v / s3;
    const double c = 2.0 * weights.curvature * proxy;
    grad.col(k) += c * (du - dv);
    grad.col(k - 1) -= c * du;
    grad.col(k + 1) += c * dv;
  }
  return out;
}

}  // namespace gpd
