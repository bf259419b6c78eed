#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "gpd/denoiser.hpp"
#include "gpd/random.hpp"
#include "gpd/scene.hpp"

namespace gpd {

/// sqrt(alpha_bar_t) alpha0 + sqrt(1 - alpha_bar_t) eps.
ControlPoints forward_sample(const ControlPoints& alpha0, int t, const ControlPoints& eps,
                             const DiffusionSchedule& schedule);

/// Overwrites column 0 with start and the last column with goal.
ControlPoints condition_endpoints(const ControlPoints& alpha, const Eigen::VectorXd& start,
                                  const Eigen::VectorXd& goal);

/// mu_theta(alpha_t, t) from a noise prediction (standard DDPM posterior mean).
Eigen::MatrixXd posterior_mean(const Eigen::MatrixXd& alpha_t, const Eigen::MatrixXd& eps_hat, int t,
                               const DiffusionSchedule& schedule);

/**
 * One ancestral step: mu_theta(alpha_t, t) - shift + sqrt(Sigma_t) z, with
 * z ~ N(0, I) drawn from rng (no draw at t = 0). `shift` (same shape, may be
 * empty) is the guidance mean offset.
 */
ControlPoints reverse_step(const DenoiserParams& params, const ControlPoints& alpha_t, int t,
                           const DiffusionSchedule& schedule, Rng& rng,
                           const ControlPoints& shift = {});

/// Guidance mean offset for one lane at step t given its normalized state,
/// or nullopt for no guidance.
using GuidanceHook =
    std::function<std::optional<ControlPoints>(int lane, int t, const ControlPoints& alpha_t)>;

/// Observes every lane's normalized state (columns = lanes, flattened) after
/// endpoint conditioning at the start of step t, and once more with t = -1 at the end.
using TraceHook = std::function<void(int t, const Eigen::MatrixXd& state)>;

struct ReverseProcessOptions {
  int retain_last = 0;                     ///< keep the outputs of the last k steps
  const DiffusionSchedule* schedule = nullptr;  ///< defaults to the checkpoint schedule
  GuidanceHook guidance;
  TraceHook trace;
};

struct ReverseProcessResult {
  std::vector<ControlPoints> final_states;             ///< normalized, one per lane
  std::vector<std::vector<ControlPoints>> retained;    ///< [k][lane], normalized, latest last
};

/**
 * Batched endpoint-conditioned ancestral sampling. Each lane draws its noise
 * from its own stream seeded by lane_seeds[lane], so results do not depend on
 * batching. start/goal are normalized configurations.
 */
ReverseProcessResult run_reverse_process(const DenoiserParams& params,
                                         const Eigen::VectorXd& start_normalized,
                                         const Eigen::VectorXd& goal_normalized,
                                         const std::vector<std::uint64_t>& lane_seeds,
                                         const ReverseProcessOptions& options = {});

/// Seed of lane `lane` for a sampling call seeded with `seed`.
std::uint64_t lane_seed(std::uint64_t seed, std::size_t lane);

/// Unguided prior ("PD"): n coefficient sets in configuration space.
std::vector<ControlPoints> sample_prior(const DenoiserParams& params, const PlanningProblem& problem,
                                        int n, std::uint64_t seed);

}  // namespace gpd
