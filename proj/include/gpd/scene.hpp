#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "gpd/bernstein.hpp"

namespace gpd {

using Point = Eigen::Vector2d;

/// Shape-aware exact equality (Eigen's operator== requires equal shapes).
inline bool exactly_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

struct Circle {
  Point center = Point::Zero();
  double radius = 0.0;
  bool operator==(const Circle&) const = default;
};

struct Box {
  Point min = Point::Zero();
  Point max = Point::Zero();
  bool operator==(const Box&) const = default;
};

using Obstacle = std::variant<Circle, Box>;

enum class Difficulty { kEmpty, kSparse, kCluttered, kNarrowPassage };

Difficulty parse_difficulty(const std::string& name);
std::string to_string(Difficulty difficulty);

/// Planar obstacle field for a disc robot of radius robot_radius.
struct Scene {
  std::uint64_t id = 0;
  std::uint64_t seed = 0;
  Box workspace{Point(0.0, 0.0), Point(1.0, 1.0)};
  double robot_radius = 0.05;
  std::vector<Obstacle> obstacles;

  bool operator==(const Scene&) const = default;
};

struct PlanningProblem {
  Scene scene;
  Eigen::VectorXd start;
  Eigen::VectorXd goal;
  double goal_tolerance = 1e-3;

  bool operator==(const PlanningProblem& other) const {
    return scene == other.scene && exactly_equal(start, other.start) &&
           exactly_equal(goal, other.goal) && goal_tolerance == other.goal_tolerance;
  }
};

struct DistanceQuery {
  double distance = 0.0;
  Point gradient = Point::Zero();
  int obstacle = -1;  ///< index of the nearest obstacle, -1 for the workspace boundary
};

/// Signed distance from a point to one obstacle surface; optional subgradient.
/// At a circle center or on a box's medial point the gradient is zero.
double obstacle_distance(const Obstacle& obstacle, const Point& p, Point* gradient = nullptr);

/// Distance from p to the workspace boundary, positive inside; gradient points inward.
double workspace_distance(const Box& workspace, const Point& p, Point* gradient = nullptr);

/// Distance to the nearest obstacle or workspace wall (negative inside an obstacle or outside the workspace).
double signed_distance(const Scene& scene, const Point& p);

/// Same, with the subgradient; obstacle = -1 when the workspace boundary is nearest
/// (ties go to the boundary, then the lowest obstacle index).
DistanceQuery signed_distance_query(const Scene& scene, const Point& p);

bool point_free(const Scene& scene, const Point& p);

/// Smallest signed distance over the whole segment [a, b], in closed form.
double segment_clearance(const Scene& scene, const Point& a, const Point& b);

/// Checks a straight segment at points spaced no more than `resolution` apart.
/// With exact = true the whole segment must keep the robot radius (segment_clearance),
/// which implies the sampled check.
bool segment_free(const Scene& scene, const Point& a, const Point& b, double resolution, bool exact = false);

/**
 * Dense collision check: every waypoint and interpolated points between
 * consecutive waypoints (spacing <= resolution) keep a clearance of at least
 * the robot radius. Sampling can tunnel through features thinner than the
 * resolution; exact = true checks each segment continuously instead.
 * Throws std::invalid_argument if resolution <= 0.
 */
bool is_collision_free(const Scene& scene, const Trajectory& traj, double resolution, bool exact = false);

struct SceneGenConfig {
  Box workspace{Point(0.0, 0.0), Point(1.0, 1.0)};
  double robot_radius = 0.05;
  int sparse_min = 3;
  int sparse_max = 6;
  int cluttered_min = 8;
  int cluttered_max = 15;
  double circle_radius_min = 0.04;
  double circle_radius_max = 0.10;
  double box_half_min = 0.03;
  double box_half_max = 0.10;
  // Gap width of the narrow-passage wall, in robot radii.
  double gap_min_radii = 2.5;
  double gap_max_radii = 4.0;
  double wall_thickness = 0.05;
};

/// Deterministic in (seed, difficulty, config).
Scene generate_scene(std::uint64_t seed, Difficulty difficulty, const SceneGenConfig& config = {});

struct ProblemGenConfig {
  double min_start_goal_distance = 0.6;
  // Required clearance (sd - r) at start and goal.
  double endpoint_clearance = 0.05;
  double goal_tolerance = 1e-3;
  int max_attempts = 2000;
};

/**
 * Samples collision-free start/goal configurations for a scene. Narrow-passage
 * scenes place start and goal on opposite sides of the wall (the wall is the
 * first two obstacles of such a scene). Throws
 * std::runtime_error if no valid pair is found within max_attempts.
 */
PlanningProblem generate_problem(const Scene& scene, Difficulty difficulty, std::uint64_t seed,
                                 const ProblemGenConfig& config = {});

}  // namespace gpd
