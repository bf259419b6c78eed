#pragma once

#include <filesystem>

#include "json.hpp"

#include "gpd/scene.hpp"

namespace gpd {

inline constexpr int kSceneFormatVersion = 1;

nlohmann::json scene_to_json(const Scene& scene);
/// Throws IoError on missing fields or an unknown version.
Scene scene_from_json(const nlohmann::json& j);

nlohmann::json problem_to_json(const PlanningProblem& problem);
PlanningProblem problem_from_json(const nlohmann::json& j);

void save_scene(const Scene& scene, const std::filesystem::path& path);
Scene load_scene(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);
/// Writes to a temporary sibling and renames, so readers never see a partial file.
void write_text_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace gpd
