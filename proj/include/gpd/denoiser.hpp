#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gpd/bernstein.hpp"
#include "gpd/dataset.hpp"
#include "gpd/schedule.hpp"

namespace gpd {

inline constexpr std::uint32_t kCheckpointFormatVersion = 1;

enum class Activation : std::uint32_t { kSiLU = 0, kTanh = 1 };

/**
 * Residual MLP over flattened coefficients:
 *   h_0 = act(W_0 [alpha; emb(t)] + b_0)
 *   h_l = h_{l-1} + act(W_l h_{l-1} + b_l),   l = 1..L-1
 *   eps = W_L h_{L-1} + b_L
 */
struct Architecture {
  int input_dim = 16;     ///< m * (c + 1)
  int embed_dim = 32;     ///< sinusoidal timestep embedding size (even)
  int hidden_width = 256;
  int hidden_layers = 4;
  Activation activation = Activation::kSiLU;

  bool operator==(const Architecture&) const = default;
};

struct DenoiserParams {
  int dim = 2;
  int degree = 7;
  int horizon = 50;
  Architecture arch;
  std::vector<Eigen::MatrixXd> weights;  ///< hidden_layers + 1 matrices
  std::vector<Eigen::VectorXd> biases;
  DiffusionSchedule schedule;
  NormalizationStats stats;

  int num_steps() const { return schedule.steps(); }
  std::size_t parameter_count() const;
  /// Throws std::invalid_argument if shapes disagree with the architecture.
  void validate() const;
  bool operator==(const DenoiserParams& other) const;
};

/// Network weights laid out like DenoiserParams, used for gradients and optimizer state.
struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  static Gradients zeros_like(const DenoiserParams& params);
};

/// PyTorch-style uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization.
DenoiserParams init_denoiser(int dim, int degree, int horizon, const Architecture& arch,
                             DiffusionSchedule schedule, NormalizationStats stats,
                             std::uint64_t seed);

/// Continuous network time for step t of a T-step schedule, so schedules of
/// different length share one embedding range.
double network_time(int t, int steps);

/// Sinusoidal embedding, one column per entry of `times` (embed_dim x N).
Eigen::MatrixXd time_embedding(const Eigen::VectorXd& times, int embed_dim);

/// Batched forward pass: `inputs` is (m(c+1)) x N flattened normalized
/// coefficients (column-major per sample), `times` length N network times.
Eigen::MatrixXd denoiser_forward(const DenoiserParams& params, const Eigen::MatrixXd& inputs,
                                 const Eigen::VectorXd& times);

/// Noise prediction for one m x (c+1) normalized coefficient matrix at step t.
ControlPoints denoiser_predict(const DenoiserParams& params, const ControlPoints& alpha_t, int t);

/**
 * Mean squared error between predicted and target noise over a batch,
 * optionally restricted by a per-entry mask (same shape as targets; the mean
 * is over unmasked entries). Fills `grad` with d(loss)/d(parameters) if non-null.
 */
double denoiser_loss(const DenoiserParams& params, const Eigen::MatrixXd& inputs,
                     const Eigen::VectorXd& times, const Eigen::MatrixXd& targets,
                     Gradients* grad, const Eigen::MatrixXd* mask = nullptr);

Eigen::VectorXd flatten(const ControlPoints& alpha);
ControlPoints unflatten(const Eigen::VectorXd& v, int dim);

/// Binary "PDMW" checkpoint; layout documented in docs/formats.md.
void save_checkpoint(const DenoiserParams& params, const std::filesystem::path& path);
/// Throws IoError on bad magic, version mismatch, truncation or inconsistent shapes.
DenoiserParams load_checkpoint(const std::filesystem::path& path);

}  // namespace gpd
