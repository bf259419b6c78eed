#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gpd/bernstein.hpp"
#include "gpd/rrt_connect.hpp"
#include "gpd/scene.hpp"

namespace gpd {

struct ExpertConfig {
  int degree = 7;
  int horizon = 50;
  RrtConfig rrt{.step = 0.05, .max_nodes = 6000, .max_samples = 12000, .time_limit = 0.0, .resolution = 0.025,
                .clearance = 0.02, .seed = 0};
  /// Retried in order when planning or the fit fails at rrt.clearance.
  std::vector<double> fallback_clearances{0.01, 0.005};
  int shortcut_iterations = 200;
  /// Max |alpha * B - tau| accepted; chosen from the measured residual distribution.
  double fit_threshold = 0.04;
  /// Dense validation resolution for the fitted trajectory.
  double resolution = 0.025;
  bool exact = true;  ///< continuous segment check of the fitted trajectory
};

enum class ExpertStatus { kOk, kPlannerFailed, kFitResidual, kInvalidFit };

std::string to_string(ExpertStatus status);

struct ExpertResult {
  ExpertStatus status = ExpertStatus::kPlannerFailed;
  ControlPoints coefficients;  ///< valid only when status == kOk
  double residual = 0.0;       ///< max-abs fit residual (when a path was found)
  Path raw_path;               ///< RRT-Connect output before smoothing

  bool ok() const { return status == ExpertStatus::kOk; }
};

/**
 * Expert demonstration: RRT-Connect (planned with extra clearance), shortcut
 * smoothing, arc-length resampling to H waypoints, least-squares Bernstein fit,
 * and dense re-validation of the fitted polynomial. Failures are reported in
 * the status, never thrown. `seed` drives both the planner and the smoother.
 */
ExpertResult generate_expert(const PlanningProblem& problem, const ExpertConfig& cfg,
                             std::uint64_t seed);

}  // namespace gpd
