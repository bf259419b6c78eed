#include "gpd/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gpd/random.hpp"

namespace gpd {
namespace {

double sign(double v) { return (v > 0.0) - (v < 0.0); }

double circle_distance(const Circle& c, const Point& p, Point* gradient) {
  const Point d = p - c.center;
  const double n = d.norm();
  if (gradient) *gradient = n > 0.0 ? Point(d / n) : Point::Zero();
  return n - c.radius;
}

double box_distance(const Box& b, const Point& p, Point* gradient) {
  const Point center = 0.5 * (b.min + b.max);
  const Point half = 0.5 * (b.max - b.min);
  const Point rel = p - center;
  const Point q = rel.cwiseAbs() - half;
  if (q.x() > 0.0 || q.y() > 0.0) {
    const Point outside = q.cwiseMax(0.0);
    const double n = outside.norm();
    if (gradient) {
      *gradient = Point(outside.x() * sign(rel.x()), outside.y() * sign(rel.y())) / n;
    }
    return n;
  }
  // Inside: nearest face along the axis with the larger (less negative) q.
  if (gradient) {
    if (q.x() > q.y()) {
      *gradient = Point(sign(rel.x()), 0.0);
    } else if (q.y() > q.x()) {
      *gradient = Point(0.0, sign(rel.y()));
    } else {
      gradient->setZero();
    }
  }
  return std::max(q.x(), q.y());
}

}  // namespace

Difficulty parse_difficulty(const std::string& name) {
  if (name == "empty") return Difficulty::kEmpty;
  if (name == "sparse") return Difficulty::kSparse;
  if (name == "cluttered") return Difficulty::kCluttered;
  if (name == "narrow-passage") return Difficulty::kNarrowPassage;
  throw std::invalid_argument("unknown difficulty '" + name +
                              "' (expected empty, sparse, cluttered, narrow-passage)");
}

std::string to_string(Difficulty difficulty) {
  switch (difficulty) {
    case Difficulty::kEmpty: return "empty";
    case Difficulty::kSparse: return "sparse";
    case Difficulty::kCluttered: return "cluttered";
    case Difficulty::kNarrowPassage: return "narrow-passage";
  }
  return "unknown";
}

namespace {

double point_segment_distance(const Point& p, const Point& a, const Point& b) {
  const Point ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + t * ab)).norm();
}

// Liang-Barsky clip of a + t (b - a), t in [0, 1], against a closed box.
bool segment_hits_box(const Box& box, const Point& a, const Point& b) {
  double t0 = 0.0, t1 = 1.0;
  const Point d = b - a;
  for (int axis = 0; axis < 2; ++axis) {
    if (d[axis] == 0.0) {
      if (a[axis] < box.min[axis] || a[axis] > box.max[axis]) return false;
      continue;
    }
    double lo = (box.min[axis] - a[axis]) / d[axis];
    double hi = (box.max[axis] - a[axis]) / d[axis];
    if (lo > hi) std::swap(lo, hi);
    t0 = std::max(t0, lo);
    t1 = std::min(t1, hi);
    if (t0 > t1) return false;
  }
  return true;
}

double segment_obstacle_clearance(const Obstacle& obstacle, const Point& a, const Point& b) {
  if (const auto* c = std::get_if<Circle>(&obstacle)) {
    return point_segment_distance(c->center, a, b) - c->radius;
  }
  const auto& box = std::get<Box>(obstacle);
  const double da = box_distance(box, a, nullptr), db = box_distance(box, b, nullptr);
  if (segment_hits_box(box, a, b)) {
    // the box distance is convex, so golden-section search finds the minimum along the segment
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    auto f = [&](double t) { return box_distance(box, a + t * (b - a), nullptr); };
    double lo = 0.0, hi = 1.0;
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 80; ++it) {
      if (f1 < f2) {
        hi = x2, x2 = x1, f2 = f1;
        x1 = hi - g * (hi - lo), f1 = f(x1);
      } else {
        lo = x1, x1 = x2, f1 = f2;
        x2 = lo + g * (hi - lo), f2 = f(x2);
      }
    }
    return std::min({0.0, da, db, f1, f2});
  }
  // disjoint convex sets: the closest pair involves a vertex of one of them
  double best = std::min(da, db);
  for (const Point& corner : {box.min, box.max, Point(box.min.x(), box.max.y()), Point(box.max.x(), box.min.y())}) {
    best = std::min(best, point_segment_distance(corner, a, b));
  }
  return best;
}

}  // namespace

double segment_clearance(const Scene& scene, const Point& a, const Point& b) {
  // wall distances are linear along the segment
  double best = std::min(workspace_distance(scene.workspace, a), workspace_distance(scene.workspace, b));
  for (const auto& o : scene.obstacles) best = std::min(best, segment_obstacle_clearance(o, a, b));
  return best;
}

double obstacle_distance(const Obstacle& obstacle, const Point& p, Point* gradient) {
  return std::visit(
      [&](const auto& o) {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, Circle>) {
          return circle_distance(o, p, gradient);
        } else {
          return box_distance(o, p, gradient);
        }
      },
      obstacle);
}

double workspace_distance(const Box& ws, const Point& p, Point* gradient) {
  const double walls[4] = {p.x() - ws.min.x(), ws.max.x() - p.x(), p.y() - ws.min.y(), ws.max.y() - p.y()};
  static const Point normals[4] = {Point(1, 0), Point(-1, 0), Point(0, 1), Point(0, -1)};
  int best = 0;
  for (int i = 1; i < 4; ++i) {
    if (walls[i] < walls[best]) best = i;
  }
  if (gradient) *gradient = normals[best];
  return walls[best];
}

DistanceQuery signed_distance_query(const Scene& scene, const Point& p) {
  DistanceQuery best;
  Point g;
  best.distance = workspace_distance(scene.workspace, p, &best.gradient);
  best.obstacle = -1;
  for (std::size_t i = 0; i < scene.obstacles.size(); ++i) {
    const double d = obstacle_distance(scene.obstacles[i], p, &g);
    if (d < best.distance) {
      best.distance = d;
      best.gradient = g;
      best.obstacle = static_cast<int>(i);
    }
  }
  return best;
}

double signed_distance(const Scene& scene, const Point& p) {
  double best = workspace_distance(scene.workspace, p);
  for (const auto& o : scene.obstacles) best = std::min(best, obstacle_distance(o, p));
  return best;
}

bool point_free(const Scene& scene, const Point& p) {
  return signed_distance(scene, p) >= scene.robot_radius;
}

bool segment_free(const Scene& scene, const Point& a, const Point& b, double resolution, bool exact) {
  if (!(resolution > 0.0)) throw std::invalid_argument("segment_free: resolution must be > 0");
  if (exact) return segment_clearance(scene, a, b) >= scene.robot_radius;
  const double length = (b - a).norm();
  const int steps = std::max(1, static_cast<int>(std::ceil(length / resolution)));
  for (int i = 0; i <= steps; ++i) {
    const double s = static_cast<double>(i) / steps;
    if (!point_free(scene, a + s * (b - a))) return false;
  }
  return true;
}

bool is_collision_free(const Scene& scene, const Trajectory& traj, double resolution, bool exact) {
  if (!(resolution > 0.0)) {
    throw std::invalid_argument("is_collision_free: resolution must be > 0");
  }
  if (traj.cols() == 0) return true;
  if (!traj.allFinite()) return false;
  if (traj.cols() == 1) return point_free(scene, traj.col(0).head<2>());
  for (Eigen::Index k = 0; k + 1 < traj.cols(); ++k) {
    if (!segment_free(scene, traj.col(k).head<2>(), traj.col(k + 1).head<2>(), resolution, exact)) {
      return false;
    }
  }
  return true;
}

Scene generate_scene(std::uint64_t seed, Difficulty difficulty, const SceneGenConfig& config) {
  Rng rng(derive_seed(seed, {0x5ce7e}));
  auto uniform = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  auto uniform_int = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };

  Scene scene;
  scene.id = seed;
  scene.seed = seed;
  scene.workspace = config.workspace;
  scene.robot_radius = config.robot_radius;
  const Point lo = config.workspace.min;
  const Point hi = config.workspace.max;

  auto random_obstacle = [&]() -> Obstacle {
    if (uniform(0.0, 1.0) < 0.5) {
      const double r = uniform(config.circle_radius_min, config.circle_radius_max);
      return Circle{Point(uniform(lo.x() + r, hi.x() - r), uniform(lo.y() + r, hi.y() - r)), r};
    }
    const Point half(uniform(config.box_half_min, config.box_half_max),
                     uniform(config.box_half_min, config.box_half_max));
    const Point c(uniform(lo.x() + half.x(), hi.x() - half.x()),
                  uniform(lo.y() + half.y(), hi.y() - half.y()));
    return Box{c - half, c + half};
  };

  switch (difficulty) {
    case Difficulty::kEmpty:
      break;
    case Difficulty::kSparse:
    case Difficulty::kCluttered: {
      const bool sparse = difficulty == Difficulty::kSparse;
      const int count = sparse ? uniform_int(config.sparse_min, config.sparse_max)
                               : uniform_int(config.cluttered_min, config.cluttered_max);
      for (int i = 0; i < count; ++i) scene.obstacles.push_back(random_obstacle());
      break;
    }
    case Difficulty::kNarrowPassage: {
      const double r = config.robot_radius;
      const double gap = uniform(config.gap_min_radii * r, config.gap_max_radii * r);
      const double span = hi.x() - lo.x();
      const double wall_x = uniform(lo.x() + 0.4 * span, lo.x() + 0.6 * span);
      const double gap_center = uniform(lo.y() + 0.25 * (hi.y() - lo.y()),
                                        lo.y() + 0.75 * (hi.y() - lo.y()));
      const double half_t = 0.5 * config.wall_thickness;
      scene.obstacles.push_back(
          Box{Point(wall_x - half_t, lo.y()), Point(wall_x + half_t, gap_center - 0.5 * gap)});
      scene.obstacles.push_back(
          Box{Point(wall_x - half_t, gap_center + 0.5 * gap), Point(wall_x + half_t, hi.y())});
      // A few small obstacles away from the gap.
      const int extra = uniform_int(0, 2);
      for (int i = 0; i < extra; ++i) {
        const double cr = uniform(config.circle_radius_min, 0.5 * (config.circle_radius_min +
                                                                   config.circle_radius_max));
        const bool left = uniform(0.0, 1.0) < 0.5;
        const double x0 = left ? lo.x() + cr : wall_x + half_t + 3.0 * r + cr;
        const double x1 = left ? wall_x - half_t - 3.0 * r - cr : hi.x() - cr;
        if (x1 <= x0) continue;
        scene.obstacles.push_back(Circle{Point(uniform(x0, x1), uniform(lo.y() + cr, hi.y() - cr)), cr});
      }
      break;
    }
  }
  return scene;
}

PlanningProblem generate_problem(const Scene& scene, Difficulty difficulty, std::uint64_t seed,
                                 const ProblemGenConfig& config) {
  Rng rng(derive_seed(seed, {0x9b0b1e}));
  const double r = scene.robot_radius;
  const Point lo = scene.workspace.min + Point::Constant(r);
  const Point hi = scene.workspace.max - Point::Constant(r);

  double start_x0 = lo.x(), start_x1 = hi.x(), goal_x0 = lo.x(), goal_x1 = hi.x();
  if (difficulty == Difficulty::kNarrowPassage && !scene.obstacles.empty()) {
    const auto* wall = std::get_if<Box>(&scene.obstacles.front());
    if (wall) {
      start_x1 = wall->min.x() - 2.0 * r;
      goal_x0 = wall->max.x() + 2.0 * r;
    }
  }
  auto uniform = [&](double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(rng);
  };
  auto clear = [&](const Point& p) {
    return signed_distance(scene, p) - r >= config.endpoint_clearance;
  };

  for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
    const Point s(uniform(start_x0, start_x1), uniform(lo.y(), hi.y()));
    const Point g(uniform(goal_x0, goal_x1), uniform(lo.y(), hi.y()));
    if ((s - g).norm() < config.min_start_goal_distance) continue;
    if (!clear(s) || !clear(g)) continue;
    PlanningProblem problem;
    problem.scene = scene;
    problem.start = s;
    problem.goal = g;
    problem.goal_tolerance = config.goal_tolerance;
    return problem;
  }
  throw std::runtime_error("generate_problem: no valid start/goal pair for scene " +
                           std::to_string(scene.id));
}

}  // namespace gpd
