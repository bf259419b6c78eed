#include "gpd/stitching.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <tuple>

#include <spdlog/spdlog.h>

#include "gpd/costs.hpp"
#include "gpd/random.hpp"

namespace gpd {

std::string to_string(StitchStatus status) {
  switch (status) {
    case StitchStatus::kSuccess: return "success";
    case StitchStatus::kLocalPlannerFailure: return "local-planner-failure";
    case StitchStatus::kNoValidTarget: return "no-valid-target";
    case StitchStatus::kWindowExhausted: return "window-exhausted";
  }
  return "unknown";
}

Trajectory path_to_matrix(const Path& path) {
  Trajectory out(2, static_cast<Eigen::Index>(path.size()));
  for (std::size_t i = 0; i < path.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = path[i];
  return out;
}

Path matrix_to_path(const Trajectory& traj) {
  Path out;
  out.reserve(traj.cols());
  for (Eigen::Index k = 0; k < traj.cols(); ++k) out.emplace_back(traj.col(k).head<2>());
  return out;
}

nlohmann::json stitch_result_to_json(const StitchResult& result) {
  auto points = [](const Path& p) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& q : p) arr.push_back({q.x(), q.y()});
    return arr;
  };
  nlohmann::json stitches = nlohmann::json::array();
  for (const auto& s : result.stitches) {
    stitches.push_back({{"from_trajectory", s.from_trajectory},
                        {"from_index", s.from_index},
                        {"to_trajectory", s.to_trajectory},
                        {"to_index", s.to_index},
                        {"path", points(s.path)}});
  }
  return {{"status", to_string(result.status)},
          {"initial_trajectory", result.initial_trajectory},
          {"waypoints", points(result.waypoints)},
          {"stitches", stitches},
          {"timing", {{"denoise", result.denoise_time}, {"stitch", result.stitch_time}}}};
}

bool window_free(const Trajectory& traj, int j, int w, const Scene& scene, double resolution, bool exact) {
  const int h = static_cast<int>(traj.cols());
  if (j < 0 || j >= h || w < 1) throw std::invalid_argument("window_free: need 0 <= j < H and w >= 1");
  const int last = std::min(j + w, h) - 1;
  if (!point_free(scene, traj.col(j).head<2>())) return false;
  for (int k = j; k < last; ++k) {
    if (!segment_free(scene, traj.col(k).head<2>(), traj.col(k + 1).head<2>(), resolution, exact)) return false;
  }
  return true;
}

StitchSearch get_valid_stitch(const StitchPool& pool, const Point& current, int j_cur, int h_cur,
                              const Scene& scene, const StitchConfig& cfg, std::uint64_t seed) {
  StitchSearch search;
  if (pool.empty()) return search;
  const double progress = h_cur > 1 ? static_cast<double>(j_cur) / (h_cur - 1) : 0.0;

  struct Candidate {
    double distance;
    int trajectory;
    int index;
  };
  std::vector<Candidate> candidates;
  for (std::size_t s = 0; s < pool.size(); ++s) {
    const Trajectory& traj = pool.trajectories[s];
    const int h = static_cast<int>(traj.cols());
    const int first = static_cast<int>(std::floor(progress * (h - 1) + 1e-9)) + 1;
    if (first > h - 1) continue;
    int best = first;
    double best_d = (traj.col(first).head<2>() - current).norm();
    for (int p = first + 1; p < h; ++p) {
      const double d = (traj.col(p).head<2>() - current).norm();
      if (d < best_d) {
        best_d = d;
        best = p;
      }
    }
    if (cfg.max_bridge > 0.0 && best_d > cfg.max_bridge) continue;
    if (!window_free(traj, best, cfg.window, scene, cfg.resolution, cfg.exact)) continue;
    candidates.push_back({best_d, static_cast<int>(s), best});
  }
  search.candidates = static_cast<int>(candidates.size());
  if (candidates.empty()) {
    search.failure = StitchStatus::kNoValidTarget;
    return search;
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.distance, a.trajectory, a.index) < std::tie(b.distance, b.trajectory, b.index);
  });
  const int attempts = std::min<int>(cfg.max_candidates, static_cast<int>(candidates.size()));
  for (int a = 0; a < attempts; ++a) {
    const auto& c = candidates[a];
    const Point target = pool.trajectories[c.trajectory].col(c.index).head<2>();
    RrtConfig local = cfg.local_planner;
    local.resolution = cfg.resolution;
    local.exact = cfg.exact;
    // Fixed per (query, target) so enlarging the pool never changes an attempt.
    local.seed = derive_seed(seed, {static_cast<std::uint64_t>(c.trajectory),
                                    static_cast<std::uint64_t>(c.index)});
    auto path = rrt_connect(current, target, scene, local);
    if (path) {
      search.target = StitchTarget{c.trajectory, c.index, std::move(*path)};
      return search;
    }
  }
  search.failure = StitchStatus::kLocalPlannerFailure;
  return search;
}

StitchResult stitch(const StitchPool& pool, const PlanningProblem& problem, const StitchConfig& cfg,
                    std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  StitchResult result;
  auto finish = [&](StitchStatus status) {
    result.status = status;
    result.stitch_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
  };
  if (pool.empty()) return finish(StitchStatus::kNoValidTarget);
  const Scene& scene = problem.scene;
  const Point goal = problem.goal.head<2>();

  std::vector<double> costs;
  costs.reserve(pool.size());
  for (const auto& traj : pool.trajectories) {
    costs.push_back(collision_cost(traj, scene, cfg.selection_margin).cost);
  }
  int i = 0;
  for (std::size_t s = 1; s < costs.size(); ++s) {
    if (costs[s] < costs[i]) i = static_cast<int>(s);
  }
  result.initial_trajectory = i;

  int j = 0;
  Path solution;
  std::set<std::pair<int, int>> visited;
  for (int stitch_round = 0;; ++stitch_round) {
    if (!visited.insert({i, j}).second) return finish(StitchStatus::kWindowExhausted);
    const Trajectory& traj = pool.trajectories[i];
    const int h = static_cast<int>(traj.cols());
    if (!window_free(traj, j, cfg.window, scene, cfg.resolution, cfg.exact)) {
      const Point current = j == 0 && solution.empty() ? Point(traj.col(0).head<2>()) : solution.back();
      auto search = get_valid_stitch(pool, current, j, h, scene, cfg,
                                     derive_seed(seed, {static_cast<std::uint64_t>(stitch_round)}));
      if (!search.target) return finish(search.failure);
      StitchTarget& target = *search.target;
      if (target.index <= j) return finish(StitchStatus::kWindowExhausted);
      // The local path ends on the target waypoint, which the rollout appends next.
      if (solution.empty()) solution.push_back(current);
      solution.insert(solution.end(), target.path.begin() + 1, target.path.end() - 1);
      result.stitches.push_back({i, j, target.trajectory, target.index, std::move(target.path)});
      i = target.trajectory;
      j = target.index;
      continue;
    }
    const Point here = traj.col(j).head<2>();
    if (!solution.empty() && !segment_free(scene, solution.back(), here, cfg.resolution, cfg.exact)) {
      return finish(StitchStatus::kWindowExhausted);
    }
    if (solution.empty() || (solution.back() - here).norm() > 0.0) solution.push_back(here);
    if (j == h - 1 || (here - goal).norm() <= problem.goal_tolerance) break;
    ++j;
  }

  result.waypoints = densify(solution, cfg.step_bound);
  if (!is_collision_free(scene, path_to_matrix(result.waypoints), cfg.resolution, cfg.exact)) {
    spdlog::error("stitch: assembled trajectory failed dense validation");
    return finish(StitchStatus::kWindowExhausted);
  }
  return finish(StitchStatus::kSuccess);
}

}  // namespace gpd
