#include "gpd/bernstein.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>

#include "gpd/errors.hpp"

namespace gpd {
namespace {

double binomial(int n, int k) {
  double result = 1.0;
  for (int i = 1; i <= k; ++i) {
    result = result * (n - k + i) / i;
  }
  return result;
}

std::string shape(const Eigen::MatrixXd& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

BernsteinTransform::BernsteinTransform(int degree, int horizon)
    : degree_(degree), horizon_(horizon) {
  if (degree < 1 || horizon < 2 || horizon < degree + 1) {
    throw std::invalid_argument("bernstein: need c >= 1, H >= 2, H >= c+1 (got c=" +
                                std::to_string(degree) + ", H=" + std::to_string(horizon) +
                                ")");
  }
  matrix_.resize(degree + 1, horizon);
  for (int k = 0; k < horizon; ++k) {
    const double x = static_cast<double>(k) / (horizon - 1);
    for (int j = 0; j <= degree; ++j) {
      matrix_(j, k) = binomial(degree, j) * std::pow(x, j) * std::pow(1.0 - x, degree - j);
    }
  }
  qr_.compute(matrix_.transpose());
  if (qr_.rank() < degree + 1) {
    throw NumericalError("bernstein: transform is rank deficient");
  }
}

Trajectory BernsteinTransform::evaluate(const ControlPoints& alpha) const {
  if (alpha.cols() != num_control_points()) {
    throw std::invalid_argument("evaluate: expected " + std::to_string(num_control_points()) +
                                " control points, got " + shape(alpha));
  }
  return alpha * matrix_;
}

ControlPoints BernsteinTransform::fit(const Trajectory& traj) const {
  if (traj.cols() != horizon_) {
    throw std::invalid_argument("fit: expected " + std::to_string(horizon_) +
                                " waypoints, got " + shape(traj));
  }
  if (!traj.allFinite()) {
    throw std::invalid_argument("fit: trajectory has non-finite entries");
  }
  ControlPoints alpha = qr_.solve(traj.transpose()).transpose();
  if (!alpha.allFinite()) {
    throw NumericalError("fit: least-squares solve produced non-finite coefficients");
  }
  return alpha;
}

ControlPoints BernsteinTransform::precondition(const Eigen::MatrixXd& grad_q) const {
  if (grad_q.cols() != horizon_) {
    throw std::invalid_argument("precondition: expected gradient with " +
                                std::to_string(horizon_) + " columns, got " + shape(grad_q));
  }
  return grad_q * matrix_.transpose();
}

TransformPtr build_transform(int degree, int horizon) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, TransformPtr> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{degree, horizon}];
  if (!slot) {
    try {
      slot = std::make_shared<const BernsteinTransform>(degree, horizon);
    } catch (...) {
      cache.erase({degree, horizon});
      throw;
    }
  }
  return slot;
}

Trajectory evaluate(const ControlPoints& alpha, const BernsteinTransform& transform) {
  return transform.evaluate(alpha);
}

ControlPoints fit_coefficients(const Trajectory& traj, int degree) {
  return build_transform(degree, static_cast<int>(traj.cols()))->fit(traj);
}

ControlPoints precondition_gradient(const BernsteinTransform& transform,
                                    const Eigen::MatrixXd& grad_q) {
  return transform.precondition(grad_q);
}

ControlPoints derivative_coefficients(const ControlPoints& alpha, int order) {
  const int degree = static_cast<int>(alpha.cols()) - 1;
  if (order < 0 || order > degree) {
    throw std::invalid_argument("derivative_coefficients: order " + std::to_string(order) +
                                " outside [0, " + std::to_string(degree) + "]");
  }
  ControlPoints current = alpha;
  for (int d = degree; d > degree - order; --d) {
    ControlPoints next(current.rows(), d);
    for (int j = 0; j < d; ++j) {
      next.col(j) = d * (current.col(j + 1) - current.col(j));
    }
    current = std::move(next);
  }
  return current;
}

double mean_squared_second_difference(const Trajectory& traj) {
  const auto n = traj.cols();
  if (n < 3) return 0.0;
  const Eigen::MatrixXd second =
      traj.middleCols(2, n - 2) - 2.0 * traj.middleCols(1, n - 2) + traj.leftCols(n - 2);
  return second.colwise().squaredNorm().mean();
}

}  // namespace gpd
