#include "gpd/rrt_connect.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gpd/random.hpp"

namespace gpd {
namespace {

struct Tree {
  std::vector<Point> nodes;
  std::vector<int> parent;

  int nearest(const Point& q) const {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double d = (nodes[i] - q).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(i);
      }
    }
    return best;
  }

  int add(const Point& p, int parent_index) {
    nodes.push_back(p);
    parent.push_back(parent_index);
    return static_cast<int>(nodes.size()) - 1;
  }

  Path branch(int index) const {
    Path out;
    for (int i = index; i >= 0; i = parent[i]) out.push_back(nodes[i]);
    return out;  // leaf -> root
  }
};

enum class Extend { kTrapped, kAdvanced, kReached };

class Planner {
 public:
  Planner(const Scene& scene, const RrtConfig& cfg) : scene_(scene), cfg_(cfg) {}

  bool free(const Point& p) const {
    return signed_distance(scene_, p) >= scene_.robot_radius + cfg_.clearance;
  }

  bool edge_free(const Point& a, const Point& b) const {
    if (cfg_.exact) return segment_clearance(scene_, a, b) >= scene_.robot_radius + cfg_.clearance;
    const double length = (b - a).norm();
    const int steps = std::max(1, static_cast<int>(std::ceil(length / cfg_.resolution)));
    for (int i = 0; i <= steps; ++i) {
      if (!free(a + (static_cast<double>(i) / steps) * (b - a))) return false;
    }
    return true;
  }

  Extend extend(Tree& tree, const Point& target, int& new_index) const {
    const int near = tree.nearest(target);
    const Point from = tree.nodes[near];
    const Point delta = target - from;
    const double dist = delta.norm();
    const bool reach = dist <= cfg_.step;
    const Point to = reach ? target : Point(from + delta * (cfg_.step / dist));
    if (!edge_free(from, to)) return Extend::kTrapped;
    new_index = tree.add(to, near);
    return reach ? Extend::kReached : Extend::kAdvanced;
  }

  Extend connect(Tree& tree, const Point& target, int& new_index, int& budget) const {
    Extend status = Extend::kAdvanced;
    while (status == Extend::kAdvanced && budget > 0) {
      status = extend(tree, target, new_index);
      if (status != Extend::kTrapped) --budget;
    }
    return status;
  }

 private:
  const Scene& scene_;
  const RrtConfig& cfg_;
};

}  // namespace

std::optional<Path> rrt_connect(const Point& start, const Point& goal, const Scene& scene,
                                const RrtConfig& cfg) {
  if (!(cfg.step > 0.0) || !(cfg.resolution > 0.0)) {
    throw std::invalid_argument("rrt_connect: step and resolution must be > 0");
  }
  Planner planner(scene, cfg);
  if (!planner.free(start) || !planner.free(goal)) return std::nullopt;
  if (start == goal) return Path{start};
  if (planner.edge_free(start, goal)) return Path{start, goal};

  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(derive_seed(cfg.seed, {0x7272}));
  const Point lo = scene.workspace.min + Point::Constant(scene.robot_radius);
  const Point hi = scene.workspace.max - Point::Constant(scene.robot_radius);
  std::uniform_real_distribution<double> ux(lo.x(), hi.x()), uy(lo.y(), hi.y());

  Tree a, b;
  a.add(start, -1);
  b.add(goal, -1);
  bool a_is_start = true;
  int budget = cfg.max_nodes - 2;
  for (int iter = 0; budget > 0 && iter < cfg.max_samples; ++iter) {
    if (cfg.time_limit > 0.0 && (iter & 31) == 0) {
      const double elapsed =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (elapsed > cfg.time_limit) break;
    }
    const Point sample(ux(rng), uy(rng));
    int a_new = -1;
    if (planner.extend(a, sample, a_new) != Extend::kTrapped) {
      --budget;
      int b_new = -1;
      if (planner.connect(b, a.nodes[a_new], b_new, budget) == Extend::kReached) {
        Path from_a = a.branch(a_new);  // a_new -> a root
        Path from_b = b.branch(b_new);  // b_new -> b root (b_new == a_new point)
        Path path;
        if (a_is_start) {
          path.assign(from_a.rbegin(), from_a.rend());
          path.insert(path.end(), from_b.begin() + 1, from_b.end());
        } else {
          path.assign(from_b.rbegin(), from_b.rend());
          path.insert(path.end(), from_a.begin() + 1, from_a.end());
        }
        return path;
      }
    }
    std::swap(a, b);
    a_is_start = !a_is_start;
  }
  return std::nullopt;
}

double path_length(const Path& path) {
  double total = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) total += (path[i] - path[i - 1]).norm();
  return total;
}

namespace {

// Point at arc-length s along the path, with the index of the segment it lies on.
std::pair<Point, std::size_t> point_at(const Path& path, const std::vector<double>& cumulative,
                                       double s) {
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), s);
  std::size_t seg = it == cumulative.begin() ? 0 : static_cast<std::size_t>(it - cumulative.begin()) - 1;
  if (seg >= path.size() - 1) seg = path.size() - 2;
  const double len = cumulative[seg + 1] - cumulative[seg];
  const double u = len > 0.0 ? std::clamp((s - cumulative[seg]) / len, 0.0, 1.0) : 0.0;
  return {path[seg] + u * (path[seg + 1] - path[seg]), seg};
}

std::vector<double> cumulative_lengths(const Path& path) {
  std::vector<double> cumulative(path.size(), 0.0);
  for (std::size_t i = 1; i < path.size(); ++i) {
    cumulative[i] = cumulative[i - 1] + (path[i] - path[i - 1]).norm();
  }
  return cumulative;
}

}  // namespace

Path shortcut_path(const Path& path, const Scene& scene, int iterations, double resolution,
                   double clearance, std::uint64_t seed, bool exact) {
  if (path.size() < 3) return path;
  RrtConfig cfg;
  cfg.resolution = resolution;
  cfg.clearance = clearance;
  cfg.exact = exact;
  Planner planner(scene, cfg);
  Rng rng(derive_seed(seed, {0x5c07}));
  Path current = path;
  for (int it = 0; it < iterations && current.size() >= 3; ++it) {
    const auto cumulative = cumulative_lengths(current);
    const double total = cumulative.back();
    if (total <= 0.0) break;
    std::uniform_real_distribution<double> us(0.0, total);
    double s0 = us(rng), s1 = us(rng);
    if (s0 > s1) std::swap(s0, s1);
    const auto [p0, seg0] = point_at(current, cumulative, s0);
    const auto [p1, seg1] = point_at(current, cumulative, s1);
    if (seg0 == seg1) continue;
    if (!planner.edge_free(p0, p1)) continue;
    Path next(current.begin(), current.begin() + static_cast<long>(seg0) + 1);
    if ((p0 - next.back()).norm() > 0.0) next.push_back(p0);
    next.push_back(p1);
    for (std::size_t i = seg1 + 1; i < current.size(); ++i) {
      if ((current[i] - next.back()).norm() > 0.0) next.push_back(current[i]);
    }
    current = std::move(next);
  }
  return current;
}

Trajectory resample_by_arc_length(const Path& path, int n) {
  if (n < 2 || path.empty()) throw std::invalid_argument("resample_by_arc_length: need n >= 2 and a path");
  Trajectory out(2, n);
  if (path.size() == 1) {
    for (int k = 0; k < n; ++k) out.col(k) = path.front();
    return out;
  }
  const auto cumulative = cumulative_lengths(path);
  const double total = cumulative.back();
  for (int k = 0; k < n; ++k) {
    out.col(k) = point_at(path, cumulative, total * k / (n - 1)).first;
  }
  out.col(0) = path.front();
  out.col(n - 1) = path.back();
  return out;
}

Path densify(const Path& path, double max_step) {
  if (!(max_step > 0.0)) throw std::invalid_argument("densify: max_step must be > 0");
  if (path.size() < 2) return path;
  Path out{path.front()};
  for (std::size_t i = 1; i < path.size(); ++i) {
    const Point a = path[i - 1], b = path[i];
    const int steps = std::max(1, static_cast<int>(std::ceil((b - a).norm() / max_step)));
    for (int s = 1; s <= steps; ++s) out.push_back(a + (static_cast<double>(s) / steps) * (b - a));
  }
  return out;
}

}  // namespace gpd
