#include "gpd/expert.hpp"

#include "gpd/random.hpp"

namespace gpd {
namespace {

// Least squares over the interior control points with both endpoints pinned
// to the first/last waypoint.
ControlPoints fit_pinned(const BernsteinTransform& transform, const Trajectory& waypoints) {
  const int c = transform.degree();
  const Eigen::MatrixXd& basis = transform.matrix();
  const Eigen::MatrixXd target = waypoints - waypoints.col(0) * basis.row(0) -
                                 waypoints.col(waypoints.cols() - 1) * basis.row(c);
  ControlPoints alpha(waypoints.rows(), c + 1);
  alpha.col(0) = waypoints.col(0);
  alpha.col(c) = waypoints.col(waypoints.cols() - 1);
  if (c > 1) {
    const Eigen::MatrixXd interior = basis.middleRows(1, c - 1).transpose();
    alpha.middleCols(1, c - 1) =
        interior.colPivHouseholderQr().solve(target.transpose()).transpose();
  }
  return alpha;
}

}  // namespace

std::string to_string(ExpertStatus status) {
  switch (status) {
    case ExpertStatus::kOk: return "ok";
    case ExpertStatus::kPlannerFailed: return "planner-failed";
    case ExpertStatus::kFitResidual: return "fit-residual";
    case ExpertStatus::kInvalidFit: return "invalid-fit";
  }
  return "unknown";
}

namespace {

ExpertResult attempt(const PlanningProblem& problem, const ExpertConfig& cfg, double clearance, std::uint64_t seed) {
  ExpertResult result;
  RrtConfig rrt = cfg.rrt;
  rrt.clearance = clearance;
  rrt.seed = derive_seed(seed, {1});
  auto path = rrt_connect(problem.start.head<2>(), problem.goal.head<2>(), problem.scene, rrt);
  if (!path) {
    result.status = ExpertStatus::kPlannerFailed;
    return result;
  }
  result.raw_path = *path;
  const Path smooth = shortcut_path(*path, problem.scene, cfg.shortcut_iterations, rrt.resolution,
                                    rrt.clearance, derive_seed(seed, {2}), rrt.exact);
  const Trajectory waypoints = resample_by_arc_length(smooth, cfg.horizon);
  const auto transform = build_transform(cfg.degree, cfg.horizon);
  ControlPoints alpha = fit_pinned(*transform, waypoints);
  const Trajectory fitted = transform->evaluate(alpha);
  result.residual = (fitted - waypoints).cwiseAbs().maxCoeff();
  if (result.residual > cfg.fit_threshold) {
    result.status = ExpertStatus::kFitResidual;
    return result;
  }
  if (!is_collision_free(problem.scene, fitted, cfg.resolution, cfg.exact)) {
    result.status = ExpertStatus::kInvalidFit;
    return result;
  }
  result.coefficients = std::move(alpha);
  result.status = ExpertStatus::kOk;
  return result;
}

}  // namespace

ExpertResult generate_expert(const PlanningProblem& problem, const ExpertConfig& cfg,
                             std::uint64_t seed) {
  std::vector<double> levels{cfg.rrt.clearance};
  levels.insert(levels.end(), cfg.fallback_clearances.begin(), cfg.fallback_clearances.end());
  ExpertResult result;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    result = attempt(problem, cfg, levels[i], derive_seed(seed, {i}));
    if (result.ok()) break;
  }
  return result;
}

}  // namespace gpd
