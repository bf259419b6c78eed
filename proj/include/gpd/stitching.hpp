#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "gpd/rrt_connect.hpp"
#include "gpd/scene.hpp"

namespace gpd {

struct StitchConfig {
  int window = 5;              ///< collision window w, in waypoints
  double resolution = 0.025;   ///< dense collision-check spacing
  double step_bound = 0.02;    ///< max spacing of the assembled output
  double selection_margin = 0.03;  ///< margin of the cost used to pick the first trajectory
  int max_candidates = 8;      ///< local-planner attempts per stitch
  double max_bridge = 0.2;     ///< targets farther than this are skipped (keeps the planner local); <= 0 means no limit
  RrtConfig local_planner{.step = 0.04, .max_nodes = 400, .max_samples = 1000, .time_limit = 0.0,
                          .resolution = 0.025, .clearance = 0.0, .seed = 0};
  bool exact = true;  ///< continuous segment checks for windows, bridges and the final path
};

/// Trajectories available for stitching, each tagged with its origin.
struct StitchPool {
  std::vector<Trajectory> trajectories;
  std::vector<std::string> tags;

  void add(Trajectory traj, std::string tag) {
    trajectories.push_back(std::move(traj));
    tags.push_back(std::move(tag));
  }
  bool empty() const { return trajectories.empty(); }
  std::size_t size() const { return trajectories.size(); }
};

enum class StitchStatus { kSuccess, kLocalPlannerFailure, kNoValidTarget, kWindowExhausted };

std::string to_string(StitchStatus status);

struct StitchSegment {
  int from_trajectory = 0;
  int from_index = 0;
  int to_trajectory = 0;
  int to_index = 0;
  Path path;  ///< local-planner path, from the current waypoint to the target waypoint
};

struct StitchResult {
  Path waypoints;  ///< assembled, densified to step_bound
  std::vector<StitchSegment> stitches;
  StitchStatus status = StitchStatus::kNoValidTarget;
  int initial_trajectory = -1;
  double denoise_time = 0.0;  ///< D, seconds (filled by the caller that denoised)
  double stitch_time = 0.0;   ///< S, seconds

  bool success() const { return status == StitchStatus::kSuccess; }
};

nlohmann::json stitch_result_to_json(const StitchResult& result);

/**
 * True iff waypoints j .. min(j + w, H) - 1 and the straight segments between
 * them are collision-free at `resolution`.
 */
bool window_free(const Trajectory& traj, int j, int w, const Scene& scene, double resolution, bool exact = false);

struct StitchTarget {
  int trajectory = 0;
  int index = 0;
  Path path;
};

struct StitchSearch {
  std::optional<StitchTarget> target;
  StitchStatus failure = StitchStatus::kNoValidTarget;  ///< meaningful when !target
  int candidates = 0;
};

/**
 * Finds the next stitch target. For each pool trajectory, the candidate is its
 * closest waypoint to `current` among indices past the current progress
 * fraction j_cur / (H - 1); it must start a free window. Candidates are tried
 * in ascending distance with RRT-Connect (seeded per target) and the first
 * local path found wins.
 */
StitchSearch get_valid_stitch(const StitchPool& pool, const Point& current, int j_cur, int h_cur,
                              const Scene& scene, const StitchConfig& cfg, std::uint64_t seed);

/**
 * Sliding-window rollout of the lowest-cost pool trajectory, jumping to other
 * trajectories through local-planner stitches whenever the window ahead is
 * blocked. Terminates: the waypoint index strictly increases.
 */
StitchResult stitch(const StitchPool& pool, const PlanningProblem& problem, const StitchConfig& cfg,
                    std::uint64_t seed);

/// Path -> 2 x N matrix.
Trajectory path_to_matrix(const Path& path);
Path matrix_to_path(const Trajectory& traj);

}  // namespace gpd
