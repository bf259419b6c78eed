#include "gpd/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <spdlog/spdlog.h>

#include "gpd/errors.hpp"
#include "gpd/scene_io.hpp"

namespace gpd {

CostKind parse_cost_kind(const std::string& name) {
  if (name == "collision") return CostKind::kCollision;
  if (name == "collision+smoothness") return CostKind::kCollisionSmoothness;
  if (name == "curvature-accel") return CostKind::kCurvatureAccel;
  throw std::invalid_argument("unknown cost kind '" + name +
                              "' (expected collision, collision+smoothness, curvature-accel)");
}

std::string to_string(CostKind kind) {
  switch (kind) {
    case CostKind::kCollision: return "collision";
    case CostKind::kCollisionSmoothness: return "collision+smoothness";
    case CostKind::kCurvatureAccel: return "curvature-accel";
  }
  return "unknown";
}

void GuideConfig::validate(int steps) const {
  if (!(safety_margin > 0.0)) throw std::invalid_argument("guide '" + name + "': safety_margin must be > 0");
  if (!margin_schedule.empty() && static_cast<int>(margin_schedule.size()) != steps) {
    throw std::invalid_argument("guide '" + name + "': margin_schedule must have T entries");
  }
  if (!scale_schedule.empty() && static_cast<int>(scale_schedule.size()) != steps) {
    throw std::invalid_argument("guide '" + name + "': scale_schedule must have T entries");
  }
  for (int t = 0; t < steps; ++t) {
    if (!(scale_at(t, steps) >= 0.0)) throw std::invalid_argument("guide '" + name + "': lambda_t must be >= 0");
    if (!(margin_at(t, steps) > 0.0)) throw std::invalid_argument("guide '" + name + "': o_t must be > 0");
  }
  if (!(max_grad_norm > 0.0)) throw std::invalid_argument("guide '" + name + "': max_grad_norm must be > 0");
}

double GuideConfig::margin_at(int t, int steps) const {
  if (!margin_schedule.empty()) return margin_schedule.at(t);
  const double u = steps > 1 ? static_cast<double>(t) / (steps - 1) : 0.0;
  return margin_end + (margin_start - margin_end) * u;
}

double GuideConfig::scale_at(int t, int /*steps*/) const {
  if (!scale_schedule.empty()) return scale_schedule.at(t);
  return guidance_scale;
}

void to_json(nlohmann::json& j, const GuideConfig& g) {
  j = {{"name", g.name},
       {"cost", to_string(g.cost)},
       {"safety_margin", g.safety_margin},
       {"margin_start", g.margin_start},
       {"margin_end", g.margin_end},
       {"guidance_scale", g.guidance_scale},
       {"accel_weight", g.smoothness.accel},
       {"curvature_weight", g.smoothness.curvature},
       {"smoothness_weight", g.smoothness_weight},
       {"max_grad_norm", g.max_grad_norm},
       {"margin_schedule", g.margin_schedule},
       {"scale_schedule", g.scale_schedule}};
}

void from_json(const nlohmann::json& j, GuideConfig& g) {
  static const std::vector<std::string> known = {
      "name", "cost", "safety_margin", "margin_start", "margin_end", "guidance_scale", "accel_weight",
      "curvature_weight", "smoothness_weight", "max_grad_norm", "margin_schedule", "scale_schedule"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("guide: unknown key '" + key + "'");
    }
  }
  GuideConfig d;
  g.name = j.value("name", d.name);
  g.cost = parse_cost_kind(j.value("cost", to_string(d.cost)));
  g.safety_margin = j.value("safety_margin", d.safety_margin);
  g.margin_start = j.value("margin_start", d.margin_start);
  g.margin_end = j.value("margin_end", d.margin_end);
  g.guidance_scale = j.value("guidance_scale", d.guidance_scale);
  g.smoothness.accel = j.value("accel_weight", d.smoothness.accel);
  g.smoothness.curvature = j.value("curvature_weight", d.smoothness.curvature);
  g.smoothness_weight = j.value("smoothness_weight", d.smoothness_weight);
  g.max_grad_norm = j.value("max_grad_norm", d.max_grad_norm);
  g.margin_schedule = j.value("margin_schedule", std::vector<double>{});
  g.scale_schedule = j.value("scale_schedule", std::vector<double>{});
}

std::vector<GuideConfig> load_guide_portfolio(const std::filesystem::path& path) {
  const auto j = read_json_file(path);
  if (!j.is_array() || j.empty()) throw ConfigError(path.string() + ": expected a non-empty JSON list of guides");
  try {
    return j.get<std::vector<GuideConfig>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void save_guide_portfolio(const std::vector<GuideConfig>& guides, const std::filesystem::path& path) {
  write_text_atomic(path, nlohmann::json(guides).dump(2) + "\n");
}

std::vector<GuideConfig> default_guide_portfolio(const GuideConfig& base) {
  struct Variant {
    double margin_factor;
    double scale_factor;
    double smoothness;
  };
  // Three collision guides at different margins, four with a smoothness term.
  const Variant variants[] = {{1.0, 1.0, 0.0}, {1.5, 1.0, 0.0}, {0.6, 1.5, 0.0},  {1.0, 0.6, 0.05},
                              {1.5, 1.5, 0.05}, {2.0, 1.0, 0.1}, {0.8, 2.0, 0.1}};
  std::vector<GuideConfig> out;
  int i = 0;
  for (const auto& v : variants) {
    GuideConfig g = base;
    g.name = "guide-" + std::to_string(i++);
    g.safety_margin = base.safety_margin * v.margin_factor;
    g.guidance_scale = base.guidance_scale * v.scale_factor;
    if (v.smoothness > 0.0) {
      g.cost = CostKind::kCollisionSmoothness;
      g.smoothness_weight = v.smoothness;
    }
    out.push_back(std::move(g));
  }
  return out;
}

CostResult guide_cost(const GuideConfig& guide, const Trajectory& traj, const Scene& scene, double margin) {
  switch (guide.cost) {
    case CostKind::kCollision:
      return collision_cost(traj, scene, margin);
    case CostKind::kCollisionSmoothness: {
      CostResult c = collision_cost(traj, scene, margin);
      const CostResult s = curvature_accel_cost(traj, guide.smoothness);
      c.cost += guide.smoothness_weight * s.cost;
      c.gradient += guide.smoothness_weight * s.gradient;
      return c;
    }
    case CostKind::kCurvatureAccel:
      return curvature_accel_cost(traj, guide.smoothness);
  }
  throw std::logic_error("guide_cost: unhandled cost kind");
}

std::optional<ControlPoints> guidance_shift(const DenoiserParams& params, const BernsteinTransform& transform,
                                            const GuideConfig& guide, const Scene& scene,
                                            const ControlPoints& alpha_t, int t, int steps,
                                            GuidanceStats* stats) {
  const double scale = guide.scale_at(t, steps);
  if (scale == 0.0) return std::nullopt;
  const ControlPoints physical = params.stats.denormalize(alpha_t);
  const Trajectory q = transform.evaluate(physical);
  const double margin = guide.margin_at(t, steps) * guide.safety_margin;
  const CostResult cost = guide_cost(guide, q, scene, margin);
  ControlPoints g = transform.precondition(cost.gradient);
  // d/d(normalized) = d/d(physical) * scale, per configuration dimension.
  g = g.array().colwise() * params.stats.scale.array();
  g.col(0).setZero();
  g.col(g.cols() - 1).setZero();
  if (!g.allFinite()) {
    if (stats) ++stats->skipped_steps;
    spdlog::debug("guidance: non-finite gradient at t={}, step skipped", t);
    return std::nullopt;
  }
  const double norm = g.norm();
  if (norm > guide.max_grad_norm) g *= guide.max_grad_norm / norm;
  return ControlPoints(scale * g);
}

ControlPoints guided_step(const DenoiserParams& params, const ControlPoints& alpha_t, int t,
                          const DiffusionSchedule& schedule, const GuideConfig& guide,
                          const PlanningProblem& problem, Rng& rng) {
  const auto transform = build_transform(params.degree, params.horizon);
  const auto shift =
      guidance_shift(params, *transform, guide, problem.scene, alpha_t, t, schedule.steps());
  ControlPoints next = reverse_step(params, alpha_t, t, schedule, rng, shift ? *shift : ControlPoints{});
  return condition_endpoints(next, params.stats.normalize_point(problem.start),
                             params.stats.normalize_point(problem.goal));
}

int argmin_index(const std::vector<double>& values) {
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] < values[best]) best = static_cast<int>(i);
  }
  return best;
}

GuidedSampleResult gpd_sample(const DenoiserParams& params, const PlanningProblem& problem,
                              const std::vector<GuideConfig>& guides, int n, std::uint64_t seed,
                              const GpdOptions& options) {
  if (guides.empty()) throw std::invalid_argument("gpd_sample: need at least one guide");
  if (n < 1) throw std::invalid_argument("gpd_sample: batch size must be >= 1");
  const DiffusionSchedule& schedule = options.schedule ? *options.schedule : params.schedule;
  const int steps = schedule.steps();
  for (const auto& g : guides) g.validate(steps);
  const auto transform = build_transform(params.degree, params.horizon);
  const int lanes = static_cast<int>(guides.size()) * n;

  std::vector<std::uint64_t> seeds(lanes);
  for (int i = 0; i < lanes; ++i) seeds[i] = lane_seed(seed, i);

  GuidedSampleResult result;
  ReverseProcessOptions rp;
  rp.retain_last = options.k_pool;
  rp.schedule = &schedule;
  rp.trace = options.trace;
  rp.guidance = [&](int lane, int t, const ControlPoints& alpha_t) {
    return guidance_shift(params, *transform, guides[lane / n], problem.scene, alpha_t, t, steps,
                          &result.stats);
  };
  const auto run = run_reverse_process(params, params.stats.normalize_point(problem.start),
                                       params.stats.normalize_point(problem.goal), seeds, rp);

  auto decode = [&](const ControlPoints& normalized, ControlPoints* coefficients) {
    ControlPoints alpha = params.stats.denormalize(normalized);
    alpha.col(0) = problem.start;
    alpha.col(alpha.cols() - 1) = problem.goal;
    Trajectory traj = transform->evaluate(alpha);
    if (coefficients) *coefficients = std::move(alpha);
    return traj;
  };

  const double selection_margin =
      options.selection_margin > 0.0 ? options.selection_margin : guides.front().safety_margin;
  for (int lane = 0; lane < lanes; ++lane) {
    ControlPoints alpha;
    Trajectory traj = decode(run.final_states[lane], &alpha);
    result.collision_costs.push_back(collision_cost(traj, problem.scene, selection_margin).cost);
    result.coefficients.push_back(std::move(alpha));
    result.trajectories.push_back(std::move(traj));
  }
  // retained[0] is the output of step k-1, retained.back() the final output.
  const int kept = static_cast<int>(run.retained.size());
  for (int r = 0; r < kept; ++r) {
    for (int lane = 0; lane < lanes; ++lane) {
      result.pool.push_back(decode(run.retained[r][lane], nullptr));
      result.pool_entries.push_back({lane / n, lane % n, kept - 1 - r});
    }
  }
  result.chosen = argmin_index(result.collision_costs);
  return result;
}

}  // namespace gpd
