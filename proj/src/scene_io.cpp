#include "gpd/scene_io.hpp"

#include <fstream>
#include <sstream>

#include "gpd/errors.hpp"

namespace gpd {
namespace {

using nlohmann::json;

json point_json(const Point& p) { return json::array({p.x(), p.y()}); }

Point point_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw IoError("scene: expected a 2-element point");
  return Point(j[0].get<double>(), j[1].get<double>());
}

Eigen::VectorXd vector_from(const json& j) {
  if (!j.is_array() || j.empty()) throw IoError("problem: expected a non-empty vector");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

}  // namespace

json scene_to_json(const Scene& scene) {
  json obstacles = json::array();
  for (const auto& o : scene.obstacles) {
    if (const auto* c = std::get_if<Circle>(&o)) {
      obstacles.push_back({{"type", "circle"}, {"center", point_json(c->center)}, {"radius", c->radius}});
    } else {
      const auto& b = std::get<Box>(o);
      obstacles.push_back({{"type", "box"}, {"min", point_json(b.min)}, {"max", point_json(b.max)}});
    }
  }
  return {{"version", kSceneFormatVersion},
          {"id", scene.id},
          {"seed", scene.seed},
          {"workspace", {{"min", point_json(scene.workspace.min)}, {"max", point_json(scene.workspace.max)}}},
          {"robot_radius", scene.robot_radius},
          {"obstacles", obstacles}};
}

Scene scene_from_json(const json& j) {
  try {
    const int version = j.at("version").get<int>();
    if (version != kSceneFormatVersion) {
      throw IoError("scene: unsupported version " + std::to_string(version));
    }
    Scene scene;
    scene.seed = j.at("seed").get<std::uint64_t>();
    scene.id = j.value("id", scene.seed);
    scene.workspace.min = point_from(j.at("workspace").at("min"));
    scene.workspace.max = point_from(j.at("workspace").at("max"));
    scene.robot_radius = j.at("robot_radius").get<double>();
    for (const auto& o : j.at("obstacles")) {
      const auto type = o.at("type").get<std::string>();
      if (type == "circle") {
        Circle c{point_from(o.at("center")), o.at("radius").get<double>()};
        if (!(c.radius > 0.0)) throw IoError("scene: circle radius must be positive");
        scene.obstacles.emplace_back(c);
      } else if (type == "box") {
        Box b{point_from(o.at("min")), point_from(o.at("max"))};
        if (!(b.max.x() > b.min.x() && b.max.y() > b.min.y())) {
          throw IoError("scene: box extent must be positive");
        }
        scene.obstacles.emplace_back(b);
      } else {
        throw IoError("scene: unknown obstacle type '" + type + "'");
      }
    }
    return scene;
  } catch (const json::exception& e) {
    throw IoError(std::string("scene: malformed JSON: ") + e.what());
  }
}

json problem_to_json(const PlanningProblem& problem) {
  return {{"scene", scene_to_json(problem.scene)},
          {"start", std::vector<double>(problem.start.data(), problem.start.data() + problem.start.size())},
          {"goal", std::vector<double>(problem.goal.data(), problem.goal.data() + problem.goal.size())},
          {"goal_tolerance", problem.goal_tolerance}};
}

PlanningProblem problem_from_json(const json& j) {
  try {
    PlanningProblem p;
    p.scene = scene_from_json(j.at("scene"));
    p.start = vector_from(j.at("start"));
    p.goal = vector_from(j.at("goal"));
    p.goal_tolerance = j.value("goal_tolerance", p.goal_tolerance);
    return p;
  } catch (const json::exception& e) {
    throw IoError(std::string("problem: malformed JSON: ") + e.what());
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_text_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << contents;
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " -> " + path.string() + ": " + ec.message());
}

void save_scene(const Scene& scene, const std::filesystem::path& path) {
  write_text_atomic(path, scene_to_json(scene).dump(2) + "\n");
}

Scene load_scene(const std::filesystem::path& path) { return scene_from_json(read_json_file(path)); }

}  // namespace gpd
