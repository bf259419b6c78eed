#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gpd/scene.hpp"

namespace gpd {

using Path = std::vector<Point>;

struct RrtConfig {
  double step = 0.05;          ///< extension step (meters)
  int max_nodes = 4000;        ///< total nodes across both trees
  int max_samples = 20000;     ///< random samples drawn, trapped or not
  double time_limit = 5.0;     ///< seconds; <= 0 disables
  double resolution = 0.025;   ///< edge validation spacing
  double clearance = 0.0;      ///< extra clearance beyond the robot radius
  std::uint64_t seed = 0;
  bool exact = true;           ///< validate edges continuously instead of at `resolution`
};

/**
 * Bidirectional RRT-Connect between two configurations inside the scene
 * workspace. Edges are validated at cfg.resolution. Returns nullopt when the
 * node or time budget runs out, or if start/goal are in collision.
 */
std::optional<Path> rrt_connect(const Point& start, const Point& goal, const Scene& scene,
                                const RrtConfig& cfg);

/// Total polyline length.
double path_length(const Path& path);

/// Random shortcutting: repeatedly replaces a sub-path by a straight collision-free segment.
Path shortcut_path(const Path& path, const Scene& scene, int iterations, double resolution,
                   double clearance, std::uint64_t seed, bool exact = true);

/// Resamples a polyline to n points equally spaced by arc length (n >= 2).
Trajectory resample_by_arc_length(const Path& path, int n);

/// Inserts points so that consecutive points are at most max_step apart.
Path densify(const Path& path, double max_step);

}  // namespace gpd
