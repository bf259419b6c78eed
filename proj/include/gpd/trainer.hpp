#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "gpd/dataset.hpp"
#include "gpd/denoiser.hpp"

namespace gpd {

struct ModelConfig {
  Architecture arch;  ///< input_dim is overwritten from the dataset
  int steps = 64;     ///< diffusion timesteps T
  ScheduleKind schedule = ScheduleKind::kCosine;
  LinearScheduleEndpoints linear;  ///< only read for the linear schedule
};

struct TrainConfig {
  int epochs = 200;
  int max_steps = 0;  ///< if > 0, overrides epochs
  int batch_size = 256;
  double learning_rate = 1e-3;
  double final_lr_fraction = 0.1;  ///< cosine decay target
  std::uint64_t seed = 0;
  double ema_decay = 0.0;  ///< 0 disables EMA
  int report_interval = 100;
  /// Keep the first/last control points clean (and out of the loss) during
  /// training, mirroring how sampling overwrites them at every step.
  bool clean_endpoints = false;
};

struct LossRecord {
  int step = 0;
  double loss = 0.0;  ///< mean training loss over the report interval
};

struct TrainReport {
  std::vector<LossRecord> curve;
  int total_steps = 0;
};

int total_train_steps(const TrainConfig& cfg, std::size_t dataset_size);

/**
 * Epsilon-prediction training with Adam on normalized coefficients.
 * Deterministic given cfg.seed. Throws std::invalid_argument on an empty
 * dataset and TrainingError on a non-finite loss.
 */
DenoiserParams train(const ExpertDataset& dataset, const ModelConfig& model, const TrainConfig& cfg,
                     TrainReport* report = nullptr,
                     const std::function<void(const LossRecord&)>& on_report = {});

/// Same, continuing from existing parameters (resume).
DenoiserParams train_from(DenoiserParams params, const ExpertDataset& dataset, const TrainConfig& cfg,
                          TrainReport* report = nullptr,
                          const std::function<void(const LossRecord&)>& on_report = {});

/// Mean eps-prediction loss of `params` on a dataset at fixed random (t, eps) draws.
double evaluate_loss(const DenoiserParams& params, const ExpertDataset& dataset, std::uint64_t seed,
                     int draws_per_sample = 4);

}  // namespace gpd
