#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "gpd/expert.hpp"
#include "gpd/scene.hpp"

namespace gpd {

inline constexpr std::uint32_t kDatasetFormatVersion = 1;

/// Per-dimension affine map: normalized = (value - mean) / scale.
struct NormalizationStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  ControlPoints normalize(const ControlPoints& alpha) const;
  ControlPoints denormalize(const ControlPoints& alpha) const;
  Eigen::VectorXd normalize_point(const Eigen::VectorXd& q) const;
  bool operator==(const NormalizationStats& o) const {
    return exactly_equal(mean, o.mean) && exactly_equal(scale, o.scale);
  }
};

/// Mean is the midpoint of the per-dimension range, scale its half-width, so
/// stored coefficients land in [-1, 1].
NormalizationStats compute_stats(const std::vector<ControlPoints>& coefficients);

struct ExpertDataset {
  int dim = 2;
  int degree = 7;
  int horizon = 50;
  double resolution = 0.025;  ///< dense-check resolution every entry was validated at
  std::vector<PlanningProblem> problems;
  std::vector<ControlPoints> coefficients;
  NormalizationStats stats;

  std::size_t size() const { return coefficients.size(); }
  bool operator==(const ExpertDataset& o) const;
};

struct DatasetGenConfig {
  std::size_t count = 1000;            ///< problems attempted
  std::vector<Difficulty> difficulties{Difficulty::kSparse, Difficulty::kCluttered};
  SceneGenConfig scene;
  ProblemGenConfig problem;
  ExpertConfig expert;
};

struct DatasetYield {
  std::size_t attempted = 0;
  std::size_t accepted = 0;
  std::map<std::string, std::size_t> failures;
  std::vector<double> residuals;  ///< fit residual of every planned problem
};

/**
 * Generates `count` problems (difficulty cycles through cfg.difficulties),
 * runs the expert on each, keeps validated fits. Deterministic in seed.
 * `progress`, if set, is called after each problem with (done, total).
 */
ExpertDataset generate_dataset(const DatasetGenConfig& cfg, std::uint64_t seed,
                               DatasetYield* yield = nullptr,
                               const std::function<void(std::size_t, std::size_t)>& progress = {});

/// Binary container, layout documented in docs/formats.md. Atomic write.
void save_dataset(const ExpertDataset& dataset, const std::filesystem::path& path);
/// Throws IoError on bad magic, unknown version, truncation or trailing bytes.
ExpertDataset load_dataset(const std::filesystem::path& path);

/// Number of bytes spent on 64-bit floats in the serialized dataset.
std::size_t dataset_float_payload_bytes(const ExpertDataset& dataset);

}  // namespace gpd
