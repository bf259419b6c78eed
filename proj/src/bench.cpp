#include "gpd/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "gpd/config.hpp"
#include "gpd/errors.hpp"
#include "gpd/random.hpp"
#include "gpd/scene_io.hpp"

#ifndef GPD_VERSION
#define GPD_VERSION "0.0.0"
#endif
#ifndef GPD_GIT_HASH
#define GPD_GIT_HASH "unknown"
#endif

namespace gpd {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct TimedSample {
  GuidedSampleResult result;
  double seconds = 0.0;
};

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double path_mssd(const Trajectory& traj, int horizon) {
  if (traj.cols() < 2) return 0.0;
  return mean_squared_second_difference(resample_by_arc_length(matrix_to_path(traj), horizon));
}

}  // namespace

Variant parse_variant(const std::string& name) {
  for (Variant v : all_variants()) {
    if (to_string(v) == name) return v;
  }
  std::string valid;
  for (Variant v : all_variants()) valid += (valid.empty() ? "" : ", ") + to_string(v);
  throw std::invalid_argument("unknown variant '" + name + "' (valid: " + valid + ")");
}

std::string to_string(Variant variant) {
  switch (variant) {
    case Variant::kPD: return "PD";
    case Variant::kGS: return "GS";
    case Variant::kPDS: return "PDS";
    case Variant::kGPD1G: return "GPD-1G";
    case Variant::kGPDnG: return "GPD-nG";
    case Variant::kGPDS: return "GPDS";
    case Variant::kRRTC: return "RRT-C";
  }
  return "unknown";
}

const std::vector<Variant>& all_variants() {
  static const std::vector<Variant> variants{Variant::kPD,    Variant::kGS,   Variant::kPDS, Variant::kGPD1G,
                                             Variant::kGPDnG, Variant::kGPDS, Variant::kRRTC};
  return variants;
}

bool needs_checkpoint(Variant variant) { return variant != Variant::kRRTC; }

const VariantSummary* BenchReport::summary(Variant v) const {
  for (const auto& s : summaries) {
    if (s.variant == v) return &s;
  }
  return nullptr;
}

std::vector<PlanningProblem> benchmark_problems(const BenchConfig& cfg) {
  std::vector<PlanningProblem> problems;
  problems.reserve(cfg.n_problems);
  for (int i = 0; i < cfg.n_problems; ++i) {
    const auto id = static_cast<std::uint64_t>(i);
    // Resample the scene until it admits a valid start/goal pair.
    for (std::uint64_t attempt = 0;; ++attempt) {
      if (attempt > 1000) throw std::runtime_error("bench: no feasible problem for id " + std::to_string(i));
      const Scene scene = generate_scene(derive_seed(cfg.seed, {id, 0, attempt}), cfg.suite, cfg.scene);
      try {
        PlanningProblem p = generate_problem(scene, cfg.suite, derive_seed(cfg.seed, {id, 1, attempt}), cfg.problem);
        if (cfg.feasibility.max_nodes > 0) {
          RrtConfig fc = cfg.feasibility;
          fc.seed = derive_seed(cfg.seed, {id, 5, attempt});
          if (!rrt_connect(p.start.head<2>(), p.goal.head<2>(), p.scene, fc)) continue;
        }
        problems.push_back(std::move(p));
        break;
      } catch (const std::runtime_error&) {
        // scene admits no start/goal pair; draw another
      }
    }
  }
  return problems;
}

bool validate_solution(const PlanningProblem& problem, const Trajectory& traj, double resolution, bool exact) {
  if (traj.cols() == 0 || !traj.allFinite()) return false;
  if ((traj.col(0) - problem.start).norm() > problem.goal_tolerance) return false;
  if ((traj.col(traj.cols() - 1) - problem.goal).norm() > problem.goal_tolerance) return false;
  return is_collision_free(problem.scene, traj, resolution, exact);
}

StitchPool gaussian_pool(const DenoiserParams& params, const PlanningProblem& problem, int size,
                         std::uint64_t seed) {
  const auto transform = build_transform(params.degree, params.horizon);
  Rng rng(derive_seed(seed, {0x6a55}));
  StitchPool pool;
  for (int i = 0; i < size; ++i) {
    ControlPoints alpha = params.stats.denormalize(standard_normal(rng, params.dim, params.degree + 1));
    alpha.col(0) = problem.start;
    alpha.col(alpha.cols() - 1) = problem.goal;
    pool.add(transform->evaluate(alpha), "gaussian-" + std::to_string(i));
  }
  return pool;
}

namespace {

StitchPool pool_from(const GuidedSampleResult& sample, const std::string& prefix) {
  StitchPool pool;
  for (std::size_t i = 0; i < sample.pool.size(); ++i) {
    const auto& e = sample.pool_entries[i];
    pool.add(sample.pool[i], prefix + "/g" + std::to_string(e.guide) + "/l" + std::to_string(e.lane) + "/s" +
                                 std::to_string(e.step));
  }
  return pool;
}

}  // namespace

std::vector<PlanOutcome> plan_variants(const BenchConfig& cfg, const DenoiserParams* params,
                                       const std::vector<GuideConfig>& portfolio, const PlanningProblem& problem,
                                       int id) {
  const auto uid = static_cast<std::uint64_t>(id);
  const std::uint64_t sample_seed = derive_seed(cfg.seed, {uid, 2});
  GpdOptions options;
  options.k_pool = cfg.k_pool;
  options.selection_margin = cfg.guide.safety_margin;

  std::optional<TimedSample> prior, guided, multi;
  auto run = [&](std::optional<TimedSample>& slot, const std::vector<GuideConfig>& guides) -> TimedSample& {
    if (!slot) {
      const auto t0 = Clock::now();
      GuidedSampleResult r = gpd_sample(*params, problem, guides, cfg.batch, sample_seed, options);
      slot = TimedSample{std::move(r), seconds_since(t0)};
    }
    return *slot;
  };
  GuideConfig unguided = cfg.guide;
  unguided.name = "prior";
  unguided.guidance_scale = 0.0;
  unguided.scale_schedule.clear();

  const int horizon = params ? params->horizon : 50;
  std::vector<PlanOutcome> outcomes;
  for (Variant variant : cfg.variants) {
    PlanOutcome out;
    ProblemRecord& rec = out.record;
    rec.problem = id;
    rec.variant = variant;
    Trajectory returned;
    const auto t0 = Clock::now();
    switch (variant) {
      case Variant::kPD:
      case Variant::kGPD1G:
      case Variant::kGPDnG: {
        TimedSample& s = variant == Variant::kPD      ? run(prior, {unguided})
                         : variant == Variant::kGPD1G ? run(guided, {cfg.guide})
                                                      : run(multi, portfolio);
        returned = s.result.best();
        out.candidates = s.result.trajectories;
        rec.denoise_time = s.seconds;
        rec.total_time = s.seconds;
        rec.claimed = true;
        rec.status = "sampled";
        break;
      }
      case Variant::kPDS:
      case Variant::kGPDS:
      case Variant::kGS: {
        StitchPool pool;
        double denoise = 0.0;
        const auto s0 = Clock::now();
        if (variant == Variant::kGS) {
          const int size = cfg.gs_pool_size > 0 ? cfg.gs_pool_size : cfg.batch * cfg.k_pool;
          pool = gaussian_pool(*params, problem, size, sample_seed);
        } else {
          TimedSample& s = variant == Variant::kPDS ? run(prior, {unguided}) : run(guided, {cfg.guide});
          denoise = s.seconds;
          pool = pool_from(s.result, to_string(variant));
        }
        const double pool_time = seconds_since(s0);
        StitchResult st = stitch(pool, problem, cfg.stitch, derive_seed(cfg.seed, {uid, 3}));
        rec.denoise_time = denoise;
        rec.stitch_time = st.stitch_time + (variant == Variant::kGS ? pool_time : 0.0);
        rec.total_time = rec.denoise_time + rec.stitch_time;
        rec.claimed = st.success();
        rec.status = to_string(st.status);
        rec.stitches = static_cast<int>(st.stitches.size());
        if (st.success()) returned = path_to_matrix(st.waypoints);
        out.candidates = pool.trajectories;
        st.denoise_time = denoise;
        out.stitch = std::move(st);
        break;
      }
      case Variant::kRRTC: {
        RrtConfig rc = cfg.rrt_baseline;
        rc.resolution = cfg.resolution;
        rc.exact = cfg.exact;
        rc.seed = derive_seed(cfg.seed, {uid, 4});
        auto path = rrt_connect(problem.start.head<2>(), problem.goal.head<2>(), problem.scene, rc);
        rec.total_time = seconds_since(t0);
        rec.claimed = path.has_value();
        rec.status = path ? "success" : "planner-failure";
        if (path) returned = path_to_matrix(*path);
        break;
      }
    }
    if (returned.cols() > 0) {
      rec.success = validate_solution(problem, returned, cfg.resolution, cfg.exact);
      rec.collision_cost = collision_cost(returned, problem.scene, cfg.guide.safety_margin).cost;
      rec.mssd = path_mssd(returned, horizon);
      if (rec.status == "sampled") rec.status = rec.success ? "success" : "collision";
    }
    out.trajectory = std::move(returned);
    outcomes.push_back(std::move(out));
  }
  return outcomes;
}

BenchReport run_benchmark(const BenchConfig& cfg, const DenoiserParams* params, const BenchObserver& observer) {
  if (cfg.n_problems < 1) throw std::invalid_argument("bench: n_problems must be >= 1");
  if (cfg.variants.empty()) throw std::invalid_argument("bench: no variants selected");
  if (cfg.batch < 1 || cfg.k_pool < 0) throw std::invalid_argument("bench: batch must be >= 1, k_pool >= 0");
  for (Variant v : cfg.variants) {
    if (needs_checkpoint(v) && !params) {
      throw ConfigError("bench: variant " + to_string(v) + " needs a trained checkpoint");
    }
  }
  const auto t0 = Clock::now();
  const std::vector<GuideConfig> portfolio =
      cfg.portfolio.empty() ? default_guide_portfolio(cfg.guide) : cfg.portfolio;
  const auto problems = benchmark_problems(cfg);

  std::vector<std::vector<ProblemRecord>> per_problem(problems.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::mutex observer_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (std::size_t i = next++; i < problems.size(); i = next++) {
      try {
        auto outcomes = plan_variants(cfg, params, portfolio, problems[i], static_cast<int>(i));
        if (observer) {
          std::lock_guard lock(observer_mutex);
          observer(static_cast<int>(i), problems[i], outcomes);
        }
        for (auto& o : outcomes) per_problem[i].push_back(std::move(o.record));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(problems.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    for (int j = 0; j < jobs; ++j) threads.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  BenchReport report;
  report.config = cfg;
  report.version = std::string(GPD_VERSION) + "+" + GPD_GIT_HASH;
  for (auto& recs : per_problem) {
    for (auto& r : recs) report.records.push_back(std::move(r));
  }
  for (Variant v : cfg.variants) {
    VariantSummary s;
    s.variant = v;
    std::vector<double> total, denoise, stitch_times;
    for (const auto& r : report.records) {
      if (r.variant != v) continue;
      ++s.problems;
      s.successes += r.success ? 1 : 0;
      s.claimed_but_invalid += (r.claimed && !r.success) ? 1 : 0;
      total.push_back(r.total_time);
      denoise.push_back(r.denoise_time);
      stitch_times.push_back(r.stitch_time);
      s.max_problem_time = std::max(s.max_problem_time, r.total_time);
    }
    s.success_rate = s.problems ? 100.0 * s.successes / s.problems : 0.0;
    s.mean_time = mean(total);
    s.median_time = median(total);
    s.mean_denoise = mean(denoise);
    s.median_denoise = median(denoise);
    s.mean_stitch = mean(stitch_times);
    s.median_stitch = median(stitch_times);
    report.summaries.push_back(s);
  }
  report.wall_time = seconds_since(t0);
  return report;
}

nlohmann::json report_to_json(const BenchReport& report) {
  nlohmann::json summaries = nlohmann::json::array();
  for (const auto& s : report.summaries) {
    summaries.push_back({{"variant", to_string(s.variant)},
                         {"successes", s.successes},
                         {"problems", s.problems},
                         {"success_rate", s.success_rate},
                         {"claimed_but_invalid", s.claimed_but_invalid},
                         {"time", {{"mean", s.mean_time}, {"median", s.median_time}, {"max", s.max_problem_time}}},
                         {"denoise", {{"mean", s.mean_denoise}, {"median", s.median_denoise}}},
                         {"stitch", {{"mean", s.mean_stitch}, {"median", s.median_stitch}}}});
  }
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : report.records) {
    records.push_back({{"problem", r.problem},
                       {"variant", to_string(r.variant)},
                       {"status", r.status},
                       {"claimed", r.claimed},
                       {"success", r.success},
                       {"denoise_time", r.denoise_time},
                       {"stitch_time", r.stitch_time},
                       {"total_time", r.total_time},
                       {"collision_cost", r.collision_cost},
                       {"stitches", r.stitches},
                       {"mssd", r.mssd}});
  }
  return {{"schema_version", kReportSchemaVersion},
          {"version", report.version},
          {"wall_time", report.wall_time},
          {"config", bench_config_to_json(report.config)},
          {"summaries", summaries},
          {"records", records}};
}

std::string report_to_csv(const BenchReport& report) {
  std::ostringstream out;
  out << "problem,variant,status,claimed,success,denoise_time,stitch_time,total_time,collision_cost,stitches,mssd\n";
  out.precision(10);
  for (const auto& r : report.records) {
    out << r.problem << ',' << to_string(r.variant) << ',' << r.status << ',' << (r.claimed ? 1 : 0) << ','
        << (r.success ? 1 : 0) << ',' << r.denoise_time << ',' << r.stitch_time << ',' << r.total_time << ','
        << r.collision_cost << ',' << r.stitches << ',' << r.mssd << '\n';
  }
  return out.str();
}

void write_report(const BenchReport& report, const std::filesystem::path& stem) {
  auto json_path = stem;
  json_path += ".json";
  auto csv_path = stem;
  csv_path += ".csv";
  write_text_atomic(json_path, report_to_json(report).dump(2) + "\n");
  write_text_atomic(csv_path, report_to_csv(report));
}

BenchReport report_from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema_version").get<int>() != kReportSchemaVersion) {
      throw IoError("report: unsupported schema version");
    }
    BenchReport report;
    report.config = bench_config_from_json(j.at("config"));
    report.version = j.value("version", "");
    report.wall_time = j.value("wall_time", 0.0);
    for (const auto& s : j.at("summaries")) {
      VariantSummary v;
      v.variant = parse_variant(s.at("variant").get<std::string>());
      v.successes = s.at("successes").get<int>();
      v.problems = s.at("problems").get<int>();
      v.success_rate = s.at("success_rate").get<double>();
      v.claimed_but_invalid = s.value("claimed_but_invalid", 0);
      v.mean_time = s.at("time").at("mean").get<double>();
      v.median_time = s.at("time").at("median").get<double>();
      v.max_problem_time = s.at("time").value("max", 0.0);
      v.mean_denoise = s.at("denoise").at("mean").get<double>();
      v.median_denoise = s.at("denoise").at("median").get<double>();
      v.mean_stitch = s.at("stitch").at("mean").get<double>();
      v.median_stitch = s.at("stitch").at("median").get<double>();
      report.summaries.push_back(v);
    }
    for (const auto& r : j.at("records")) {
      ProblemRecord p;
      p.problem = r.at("problem").get<int>();
      p.variant = parse_variant(r.at("variant").get<std::string>());
      p.status = r.at("status").get<std::string>();
      p.claimed = r.at("claimed").get<bool>();
      p.success = r.at("success").get<bool>();
      p.denoise_time = r.at("denoise_time").get<double>();
      p.stitch_time = r.at("stitch_time").get<double>();
      p.total_time = r.at("total_time").get<double>();
      p.collision_cost = r.at("collision_cost").get<double>();
      p.stitches = r.at("stitches").get<int>();
      p.mssd = r.at("mssd").get<double>();
      report.records.push_back(std::move(p));
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("report: malformed JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("report: ") + e.what());
  }
}

double proportion_test_p_value(int k1, int k2, int n) {
  if (n <= 0) return 1.0;
  const double p1 = static_cast<double>(k1) / n;
  const double p2 = static_cast<double>(k2) / n;
  const double pooled = 0.5 * (p1 + p2);
  const double var = pooled * (1.0 - pooled) * 2.0 / n;
  if (var <= 0.0) return k1 == k2 ? 1.0 : 0.0;
  const double z = std::abs(p1 - p2) / std::sqrt(var);
  return std::erfc(z / std::sqrt(2.0));
}

std::vector<DiffEntry> compare_reports(const BenchReport& a, const BenchReport& b) {
  if (a.config.suite != b.config.suite || a.config.n_problems != b.config.n_problems) {
    throw std::invalid_argument("compare_reports: reports use different suites or problem counts");
  }
  std::vector<DiffEntry> diff;
  const int n = a.config.n_problems;
  for (Variant v : all_variants()) {
    const VariantSummary* sa = a.summary(v);
    const VariantSummary* sb = b.summary(v);
    if (!sa && !sb) continue;
    DiffEntry e;
    e.variant = to_string(v);
    if (!sa || !sb) {
      e.field = sa ? "missing_in_b" : "missing_in_a";
      e.a = sa ? sa->success_rate : 0.0;
      e.b = sb ? sb->success_rate : 0.0;
      e.delta = e.b - e.a;
      diff.push_back(e);
      continue;
    }
    if (sa->successes == sb->successes) continue;
    e.field = "success_rate";
    e.a = sa->success_rate;
    e.b = sb->success_rate;
    e.delta = e.b - e.a;
    e.p_value = proportion_test_p_value(sa->successes, sb->successes, n);
    e.significant = e.p_value < 0.05;
    diff.push_back(e);
  }
  return diff;
}

DiffEntry compare_variants(const BenchReport& report, Variant a, Variant b) {
  const VariantSummary* sa = report.summary(a);
  const VariantSummary* sb = report.summary(b);
  if (!sa || !sb) throw std::invalid_argument("compare_variants: variant missing from report");
  DiffEntry e;
  e.variant = to_string(b) + " vs " + to_string(a);
  e.field = "success_rate";
  e.a = sa->success_rate;
  e.b = sb->success_rate;
  e.delta = e.b - e.a;
  e.p_value = proportion_test_p_value(sa->successes, sb->successes, report.config.n_problems);
  e.significant = e.p_value < 0.05;
  return e;
}

}  // namespace gpd
