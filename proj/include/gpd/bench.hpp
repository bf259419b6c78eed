#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "gpd/denoiser.hpp"
#include "gpd/guidance.hpp"
#include "gpd/scene.hpp"
#include "gpd/stitching.hpp"

namespace gpd {

inline constexpr int kReportSchemaVersion = 1;

enum class Variant { kPD, kGS, kPDS, kGPD1G, kGPDnG, kGPDS, kRRTC };

/// Throws std::invalid_argument listing the valid names.
Variant parse_variant(const std::string& name);
std::string to_string(Variant variant);
const std::vector<Variant>& all_variants();
bool needs_checkpoint(Variant variant);

struct BenchConfig {
  Difficulty suite = Difficulty::kCluttered;
  int n_problems = 200;
  std::vector<Variant> variants{Variant::kPD, Variant::kGPD1G};
  int batch = 32;       ///< denoising batch n
  int k_pool = 5;       ///< retained final steps for stitching pools
  int gs_pool_size = 0; ///< Gaussian pool size for GS; <= 0 means batch * k_pool
  std::uint64_t seed = 1000;
  double resolution = 0.025;
  bool exact = true;    ///< success requires the continuous segment check, not only sampled points
  int jobs = 1;
  double watchdog_seconds = 60.0;
  SceneGenConfig scene;
  ProblemGenConfig problem;
  GuideConfig guide;                 ///< the single guide of GPD-1G / GPDS
  std::vector<GuideConfig> portfolio;  ///< GPD-nG guides; empty = default portfolio
  StitchConfig stitch;
  /// Problems are kept only if this planner solves them (no time limit, so the
  /// suite stays deterministic); max_nodes <= 0 disables the check.
  RrtConfig feasibility{.step = 0.03, .max_nodes = 20000, .max_samples = 40000, .time_limit = 0.0,
                        .resolution = 0.01, .clearance = 0.0, .seed = 0};
  RrtConfig rrt_baseline{.step = 0.04, .max_nodes = 4000, .max_samples = 10000, .time_limit = 0.0,
                         .resolution = 0.025, .clearance = 0.0, .seed = 0};
};

struct ProblemRecord {
  int problem = 0;
  Variant variant = Variant::kPD;
  std::string status;
  bool claimed = false;    ///< the planner reported success
  bool success = false;    ///< oracle-validated success
  double denoise_time = 0.0;
  double stitch_time = 0.0;
  double total_time = 0.0;
  double collision_cost = 0.0;  ///< of the returned trajectory at the selection margin
  int stitches = 0;
  double mssd = 0.0;             ///< mean squared second difference of the returned path
};

struct VariantSummary {
  Variant variant = Variant::kPD;
  int successes = 0;
  int problems = 0;
  double success_rate = 0.0;  ///< percent
  double mean_time = 0.0, median_time = 0.0;
  double mean_denoise = 0.0, median_denoise = 0.0;
  double mean_stitch = 0.0, median_stitch = 0.0;
  int claimed_but_invalid = 0;
  double max_problem_time = 0.0;
};

struct BenchReport {
  BenchConfig config;
  std::vector<VariantSummary> summaries;
  std::vector<ProblemRecord> records;  ///< problem-major, variant order as configured
  std::string version;
  double wall_time = 0.0;

  const VariantSummary* summary(Variant v) const;
};

/// The problems every variant is evaluated on; a pure function of cfg.
std::vector<PlanningProblem> benchmark_problems(const BenchConfig& cfg);

/**
 * Oracle success: endpoints within goal tolerance of start/goal and the dense
 * collision check passes at `resolution` (continuously along each segment when exact).
 */
bool validate_solution(const PlanningProblem& problem, const Trajectory& traj, double resolution, bool exact = false);

/// Gaussian-sampled pool (GS): normalized N(0, I) coefficients, denormalized and endpoint-conditioned.
StitchPool gaussian_pool(const DenoiserParams& params, const PlanningProblem& problem, int size,
                         std::uint64_t seed);

struct PlanOutcome {
  ProblemRecord record;
  Trajectory trajectory;               ///< returned path (empty when nothing was returned)
  std::optional<StitchResult> stitch;  ///< stitched variants only
  std::vector<Trajectory> candidates;  ///< final batch or stitch pool, for plotting
};

/// Runs cfg.variants on one problem; problem `id` seeds every stochastic stage.
std::vector<PlanOutcome> plan_variants(const BenchConfig& cfg, const DenoiserParams* params,
                                       const std::vector<GuideConfig>& portfolio, const PlanningProblem& problem,
                                       int id);

/**
 * Runs every configured variant on every problem. `params` may be null only
 * if no variant needs a checkpoint (throws ConfigError otherwise, before any
 * work). Success counts are deterministic in cfg; timings are wall clock.
 * `observer` sees every problem's outcomes (serialized, in completion order).
 */
using BenchObserver =
    std::function<void(int id, const PlanningProblem& problem, const std::vector<PlanOutcome>& outcomes)>;
BenchReport run_benchmark(const BenchConfig& cfg, const DenoiserParams* params, const BenchObserver& observer = {});

nlohmann::json report_to_json(const BenchReport& report);
std::string report_to_csv(const BenchReport& report);
/// Writes <stem>.json and <stem>.csv atomically.
void write_report(const BenchReport& report, const std::filesystem::path& stem);
/// Summary-level reload (records and summaries), enough for comparisons.
BenchReport report_from_json(const nlohmann::json& j);

struct DiffEntry {
  std::string variant;
  std::string field;
  double a = 0.0;
  double b = 0.0;
  double delta = 0.0;
  double p_value = 1.0;
  bool significant = false;
};

/// Two-sided pooled two-proportion test p-value for k1/n vs k2/n.
double proportion_test_p_value(int k1, int k2, int n);

/**
 * Field-wise success-rate differences of the variants common to both reports
 * (plus variants missing from either), flagged significant at p < 0.05.
 * Throws std::invalid_argument if suite or problem count differ.
 */
std::vector<DiffEntry> compare_reports(const BenchReport& a, const BenchReport& b);

/// Success-rate comparison of two variants inside one report (b minus a).
DiffEntry compare_variants(const BenchReport& report, Variant a, Variant b);

}  // namespace gpd
