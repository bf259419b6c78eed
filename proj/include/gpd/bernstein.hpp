#pragma once

#include <memory>

#include <Eigen/Dense>

namespace gpd {

/// Coefficient matrix, one column per control point (m x (c+1)).
using ControlPoints = Eigen::MatrixXd;
/// Waypoint matrix, one column per waypoint (m x H).
using Trajectory = Eigen::MatrixXd;

/**
 * Bernstein basis of degree c sampled at H uniformly spaced parameters
 * x_k = k / (H-1). Entry (j, k) is C(c, j) x_k^j (1 - x_k)^(c - j), so a
 * coefficient matrix maps to waypoints by a single product alpha * B.
 *
 * Immutable after construction; safe to share between threads.
 */
class BernsteinTransform {
 public:
  /// Throws std::invalid_argument unless c >= 1, H >= 2 and H >= c + 1.
  BernsteinTransform(int degree, int horizon);

  int degree() const { return degree_; }
  int horizon() const { return horizon_; }
  int num_control_points() const { return degree_ + 1; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }

  /// tau = alpha * B.
  Trajectory evaluate(const ControlPoints& alpha) const;

  /// Least-squares coefficients minimizing ||alpha * B - tau||_F.
  ControlPoints fit(const Trajectory& traj) const;

  /// grad_q * B^T: the chain rule through tau = alpha * B.
  ControlPoints precondition(const Eigen::MatrixXd& grad_q) const;

 private:
  int degree_;
  int horizon_;
  Eigen::MatrixXd matrix_;
  // QR of B^T, reused by every fit for this (c, H).
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
};

using TransformPtr = std::shared_ptr<const BernsteinTransform>;

/// Returns the process-wide cached transform for (c, H), building it on first use.
TransformPtr build_transform(int degree, int horizon);

Trajectory evaluate(const ControlPoints& alpha, const BernsteinTransform& transform);

/// Fits degree-c coefficients to a waypoint matrix through the cached transform.
ControlPoints fit_coefficients(const Trajectory& traj, int degree);

ControlPoints precondition_gradient(const BernsteinTransform& transform,
                                    const Eigen::MatrixXd& grad_q);

/**
 * Control points of the order-th derivative curve (with respect to x in
 * [0, 1]) by repeated differencing b'_j = c (b_{j+1} - b_j). The result has
 * c + 1 - order columns. Throws std::invalid_argument if order > c or < 0.
 */
ControlPoints derivative_coefficients(const ControlPoints& alpha, int order);

/// Mean squared second difference of a waypoint sequence (a smoothness measure).
double mean_squared_second_difference(const Trajectory& traj);

}  // namespace gpd
