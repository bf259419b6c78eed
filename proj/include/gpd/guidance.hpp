#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "gpd/costs.hpp"
#include "gpd/sampler.hpp"

namespace gpd {

enum class CostKind { kCollision, kCollisionSmoothness, kCurvatureAccel };

CostKind parse_cost_kind(const std::string& name);
std::string to_string(CostKind kind);

/**
 * One guide: which cost steers the sampler, at what margin, and how hard.
 * Per-step schedules are either explicit (length T) or generated: the margin
 * multiplier o_t is annealed linearly from margin_start (t = T-1) to
 * margin_end (t = 0), and the guidance scale lambda_t is constant.
 */
struct GuideConfig {
  std::string name = "collision";
  CostKind cost = CostKind::kCollision;
  double safety_margin = 0.03;  ///< epsilon_safe, meters
  double margin_start = 2.0;
  double margin_end = 1.0;
  std::vector<double> margin_schedule;  ///< explicit o_t, overrides start/end
  double guidance_scale = 0.1;
  std::vector<double> scale_schedule;  ///< explicit lambda_t, overrides guidance_scale
  SmoothnessWeights smoothness{.accel = 1.0, .curvature = 0.0};
  double smoothness_weight = 1.0;  ///< multiplier on the smoothness term for collision+smoothness
  double max_grad_norm = 1.0;      ///< clip of the normalized-space gradient

  /// Throws std::invalid_argument if the guide breaks its invariants for T steps.
  void validate(int steps) const;
  /// Margin multiplier o_t (the cost margin is o_t * safety_margin).
  double margin_at(int t, int steps) const;
  double scale_at(int t, int steps) const;
};

void to_json(nlohmann::json& j, const GuideConfig& g);
void from_json(const nlohmann::json& j, GuideConfig& g);

std::vector<GuideConfig> load_guide_portfolio(const std::filesystem::path& path);
void save_guide_portfolio(const std::vector<GuideConfig>& guides, const std::filesystem::path& path);

/// Seven guides differing in (margin, scale, smoothness weight).
std::vector<GuideConfig> default_guide_portfolio(const GuideConfig& base);

/// Trajectory cost the guide descends (cost + waypoint gradient) at margin `margin`.
CostResult guide_cost(const GuideConfig& guide, const Trajectory& traj, const Scene& scene, double margin);

struct GuidanceStats {
  int skipped_steps = 0;  ///< non-finite gradients
};

/**
 * Guidance mean offset lambda_t * G for one normalized state: decode the
 * denormalized coefficients, take the waypoint cost gradient at margin
 * o_t * epsilon_safe, precondition through B^T, map back into normalized
 * coefficient space and clip. Returns nullopt when lambda_t = 0 or the
 * gradient is not finite.
 */
std::optional<ControlPoints> guidance_shift(const DenoiserParams& params, const BernsteinTransform& transform,
                                            const GuideConfig& guide, const Scene& scene,
                                            const ControlPoints& alpha_t, int t, int steps,
                                            GuidanceStats* stats = nullptr);

/// One guided ancestral step on normalized coefficients; endpoints re-fixed afterward.
ControlPoints guided_step(const DenoiserParams& params, const ControlPoints& alpha_t, int t,
                          const DiffusionSchedule& schedule, const GuideConfig& guide,
                          const PlanningProblem& problem, Rng& rng);

struct PoolEntry {
  int guide = 0;
  int lane = 0;  ///< index within the guide's batch
  int step = 0;  ///< diffusion step the trajectory was taken after (0 = final)
};

struct GuidedSampleResult {
  std::vector<ControlPoints> coefficients;  ///< final, configuration space; guide-major
  std::vector<Trajectory> trajectories;
  std::vector<double> collision_costs;
  std::vector<Trajectory> pool;  ///< last k_pool steps across all guides and lanes
  std::vector<PoolEntry> pool_entries;
  int chosen = 0;
  GuidanceStats stats;

  const Trajectory& best() const { return trajectories.at(chosen); }
};

struct GpdOptions {
  int k_pool = 5;
  /// Margin of the selection cost; <= 0 means the first guide's safety margin.
  double selection_margin = 0.0;
  const DiffusionSchedule* schedule = nullptr;  ///< override (timing experiments)
  TraceHook trace;
};

/**
 * Guided polynomial diffusion for every guide over a batch of n lanes.
 * Returns every final trajectory, the pool of the last k steps, and the index
 * of the minimum collision cost (lowest index on ties).
 */
GuidedSampleResult gpd_sample(const DenoiserParams& params, const PlanningProblem& problem,
                              const std::vector<GuideConfig>& guides, int n, std::uint64_t seed,
                              const GpdOptions& options = {});

/// argmin with lowest-index tie breaking.
int argmin_index(const std::vector<double>& values);

}  // namespace gpd
