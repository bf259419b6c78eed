#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "gpd/bench.hpp"
#include "gpd/dataset.hpp"
#include "gpd/trainer.hpp"

namespace gpd {

/// Every tunable of the pipeline, grouped by subcommand.
struct AppConfig {
  std::uint64_t seed = 0;
  int jobs = 1;
  DatasetGenConfig data;
  ModelConfig model;
  TrainConfig train;
  BenchConfig bench;  ///< also drives `plan` (batch, k_pool, guide, stitch, ...)
};

// Strict conversions: unknown keys and wrong types throw ConfigError.
nlohmann::json config_to_json(const AppConfig& cfg);
AppConfig config_from_json(const nlohmann::json& j);
nlohmann::json bench_config_to_json(const BenchConfig& cfg);
BenchConfig bench_config_from_json(const nlohmann::json& j);

/**
 * Applies one "a.b.c=value" override to a config document. The key must
 * already exist; value is parsed as JSON and falls back to a plain string.
 */
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// defaults < file (merge patch) < overrides, validated strictly.
AppConfig load_layered_config(const std::optional<std::filesystem::path>& file,
                              const std::vector<std::string>& overrides);

}  // namespace gpd
