// gpd: dataset generation, training, planning, benchmarking and file inspection.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "gpd/bench.hpp"
#include "gpd/binary_io.hpp"
#include "gpd/config.hpp"
#include "gpd/dataset.hpp"
#include "gpd/denoiser.hpp"
#include "gpd/errors.hpp"
#include "gpd/guidance.hpp"
#include "gpd/scene_io.hpp"
#include "gpd/stitching.hpp"
#include "gpd/trainer.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitPlanningFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

// Raised for planning/training failures that should map to exit code 1.
struct PlanningFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GlobalOptions {
  std::optional<std::string> config_file;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  int verbosity = 1;
  bool dump_config = false;
};

gpd::AppConfig resolve_config(const GlobalOptions& g) {
  std::optional<fs::path> file;
  if (g.config_file) file = *g.config_file;
  gpd::AppConfig cfg = gpd::load_layered_config(file, g.overrides);
  if (g.seed) {
    cfg.seed = *g.seed;
    cfg.train.seed = *g.seed;
    cfg.bench.seed = *g.seed;
  }
  if (g.jobs) {
    if (*g.jobs < 1) throw gpd::ConfigError("--jobs must be >= 1");
    cfg.jobs = *g.jobs;
  }
  cfg.bench.jobs = cfg.jobs;
  return cfg;
}

void set_verbosity(int v) {
  static const spdlog::level::level_enum levels[] = {spdlog::level::warn, spdlog::level::info,
                                                     spdlog::level::debug, spdlog::level::trace};
  spdlog::set_level(levels[std::clamp(v, 0, 3)]);
  spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
}

std::string version_string() { return std::string(GPD_VERSION) + "+" + GPD_GIT_HASH; }

void require_file(const std::string& path, const char* what) {
  if (!fs::is_regular_file(path)) throw gpd::IoError(std::string(what) + " '" + path + "' does not exist");
}

void require_writable_parent(const std::string& path) {
  const fs::path parent = fs::absolute(path).parent_path();
  if (!fs::is_directory(parent)) throw gpd::IoError("output directory '" + parent.string() + "' does not exist");
}

// ---- gen-data ----

struct GenDataArgs {
  std::string out;
  std::optional<std::size_t> count;
  std::vector<std::string> difficulties;
  std::string residuals_csv;
};

int cmd_gen_data(const gpd::AppConfig& base, const GenDataArgs& a) {
  gpd::AppConfig cfg = base;
  if (a.count) cfg.data.count = *a.count;
  if (!a.difficulties.empty()) {
    cfg.data.difficulties.clear();
    for (const auto& d : a.difficulties) cfg.data.difficulties.push_back(gpd::parse_difficulty(d));
  }
  if (cfg.data.count == 0) throw std::invalid_argument("gen-data: count must be >= 1");
  require_writable_parent(a.out);

  gpd::DatasetYield yield;
  std::size_t last_pct = 0;
  const auto dataset = gpd::generate_dataset(cfg.data, cfg.seed, &yield, [&](std::size_t done, std::size_t total) {
    const std::size_t pct = 100 * done / total;
    if (pct >= last_pct + 10) {
      last_pct = pct;
      spdlog::info("gen-data: {}/{} problems", done, total);
    }
  });
  std::printf("attempted %zu  accepted %zu  yield %.1f%%\n", yield.attempted, yield.accepted,
              yield.attempted ? 100.0 * yield.accepted / yield.attempted : 0.0);
  for (const auto& [reason, n] : yield.failures) std::printf("  rejected (%s): %zu\n", reason.c_str(), n);
  if (!a.residuals_csv.empty()) {
    std::ostringstream csv;
    csv.precision(12);
    csv << "residual\n";
    for (double r : yield.residuals) csv << r << '\n';
    gpd::write_text_atomic(a.residuals_csv, csv.str());
  }
  if (dataset.size() == 0) throw PlanningFailure("gen-data: every expert demonstration was rejected");
  gpd::save_dataset(dataset, a.out);
  spdlog::info("wrote {} entries to {}", dataset.size(), a.out);
  return kExitOk;
}

// ---- train ----

struct TrainArgs {
  std::string data;
  std::string out;
  std::string resume;
  std::string loss_csv;
};

int cmd_train(const gpd::AppConfig& cfg, const TrainArgs& a) {
  require_file(a.data, "dataset");
  if (!a.resume.empty()) require_file(a.resume, "resume checkpoint");
  require_writable_parent(a.out);
  const auto dataset = gpd::load_dataset(a.data);
  spdlog::info("dataset: {} entries, m={} c={} H={}", dataset.size(), dataset.dim, dataset.degree, dataset.horizon);

  gpd::TrainReport report;
  auto log = [](const gpd::LossRecord& r) { spdlog::info("step {:>7}  loss {:.5f}", r.step, r.loss); };
  gpd::DenoiserParams params;
  if (!a.resume.empty()) {
    auto start = gpd::load_checkpoint(a.resume);
    if (start.dim != dataset.dim || start.degree != dataset.degree || start.horizon != dataset.horizon) {
      throw gpd::IoError("train: checkpoint shape does not match the dataset");
    }
    params = gpd::train_from(std::move(start), dataset, cfg.train, &report, log);
  } else {
    params = gpd::train(dataset, cfg.model, cfg.train, &report, log);
  }
  gpd::save_checkpoint(params, a.out);

  std::ostringstream csv;
  csv.precision(10);
  csv << "step,loss\n";
  for (const auto& r : report.curve) csv << r.step << ',' << r.loss << '\n';
  const std::string loss_path = a.loss_csv.empty() ? a.out + ".loss.csv" : a.loss_csv;
  gpd::write_text_atomic(loss_path, csv.str());
  std::printf("trained %d steps, %zu parameters; final loss %.5f\n", report.total_steps, params.parameter_count(),
              report.curve.empty() ? 0.0 : report.curve.back().loss);
  return kExitOk;
}

// ---- plan ----

struct PlanArgs {
  std::string checkpoint;
  std::string scene;
  std::vector<double> start, goal;
  std::string variant = "GPDS";
  std::string out;
  std::string plot;
  std::string portfolio;
};

gpd::PlanningProblem load_problem(const PlanArgs& a, const gpd::AppConfig& cfg) {
  require_file(a.scene, "scene");
  const json j = gpd::read_json_file(a.scene);
  if (j.contains("start")) {
    if (!a.start.empty() || !a.goal.empty()) throw gpd::ConfigError("plan: problem file already has start/goal");
    return gpd::problem_from_json(j);
  }
  if (a.start.size() != 2 || a.goal.size() != 2) {
    throw gpd::ConfigError("plan: scene file without start/goal needs --start x,y and --goal x,y");
  }
  gpd::PlanningProblem p;
  p.scene = gpd::scene_from_json(j);
  p.start = gpd::Point(a.start[0], a.start[1]);
  p.goal = gpd::Point(a.goal[0], a.goal[1]);
  p.goal_tolerance = cfg.bench.problem.goal_tolerance;
  return p;
}

json path_json(const gpd::Trajectory& traj) {
  json a = json::array();
  for (Eigen::Index k = 0; k < traj.cols(); ++k) a.push_back({traj(0, k), traj(1, k)});
  return a;
}

void append_plot_rows(std::ostringstream& csv, const gpd::Trajectory& traj, const std::string& variant,
                      const std::string& tag) {
  for (Eigen::Index k = 0; k < traj.cols(); ++k) {
    csv << k << ',' << traj(0, k) << ',' << traj(1, k) << ',' << variant << ',' << tag << '\n';
  }
}

int cmd_plan(const gpd::AppConfig& cfg, const PlanArgs& a) {
  const gpd::Variant variant = gpd::parse_variant(a.variant);
  const gpd::PlanningProblem problem = load_problem(a, cfg);
  if (!a.out.empty()) require_writable_parent(a.out);
  if (!a.plot.empty()) require_writable_parent(a.plot);
  std::optional<gpd::DenoiserParams> params;
  if (gpd::needs_checkpoint(variant)) {
    if (a.checkpoint.empty()) throw gpd::ConfigError("plan: variant " + a.variant + " needs --checkpoint");
    require_file(a.checkpoint, "checkpoint");
    params = gpd::load_checkpoint(a.checkpoint);
  }
  gpd::BenchConfig bc = cfg.bench;
  bc.variants = {variant};
  if (!a.portfolio.empty()) bc.portfolio = gpd::load_guide_portfolio(a.portfolio);
  const auto portfolio = bc.portfolio.empty() ? gpd::default_guide_portfolio(bc.guide) : bc.portfolio;

  auto outcomes = gpd::plan_variants(bc, params ? &*params : nullptr, portfolio, problem, 0);
  const gpd::PlanOutcome& o = outcomes.front();
  const auto& r = o.record;

  json sol = {{"version", version_string()},
              {"variant", a.variant},
              {"status", r.status},
              {"claimed", r.claimed},
              {"success", r.success},
              {"timings", {{"denoise", r.denoise_time}, {"stitch", r.stitch_time}, {"total", r.total_time}}},
              {"collision_cost", r.collision_cost},
              {"mssd", r.mssd},
              {"problem", gpd::problem_to_json(problem)},
              {"trajectory", path_json(o.trajectory)}};
  if (o.stitch) sol["stitch"] = gpd::stitch_result_to_json(*o.stitch);
  const std::string text = sol.dump(2) + "\n";
  if (a.out.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    gpd::write_text_atomic(a.out, text);
  }

  if (!a.plot.empty()) {
    std::ostringstream csv;
    csv.precision(10);
    csv << "t,x,y,variant,tag\n";
    for (std::size_t i = 0; i < o.candidates.size(); ++i) {
      append_plot_rows(csv, o.candidates[i], a.variant, "candidate-" + std::to_string(i));
    }
    if (o.stitch) {
      for (std::size_t i = 0; i < o.stitch->stitches.size(); ++i) {
        append_plot_rows(csv, gpd::path_to_matrix(o.stitch->stitches[i].path), a.variant,
                         "stitch-" + std::to_string(i));
      }
    }
    append_plot_rows(csv, o.trajectory, a.variant, "solution");
    gpd::write_text_atomic(a.plot, csv.str());
  }
  spdlog::info("{}: {} in {:.3f} s", a.variant, r.status, r.total_time);
  return r.success ? kExitOk : kExitPlanningFailure;
}

// ---- bench ----

struct BenchArgs {
  std::string checkpoint;
  std::string out = "bench_report";
  std::vector<std::string> variants;
  std::optional<std::string> suite;
  std::optional<int> n_problems;
  std::string portfolio;
  std::string compare;
};

void print_summary(const gpd::BenchReport& report) {
  std::printf("%-8s %8s %9s %10s %10s %10s %8s\n", "variant", "success", "SR(%)", "median(s)", "D(s)", "S(s)",
              "invalid");
  for (const auto& s : report.summaries) {
    std::printf("%-8s %4d/%-3d %9.2f %10.4f %10.4f %10.4f %8d\n", gpd::to_string(s.variant).c_str(), s.successes,
                s.problems, s.success_rate, s.median_time, s.median_denoise, s.median_stitch, s.claimed_but_invalid);
  }
}

int cmd_bench(const gpd::AppConfig& cfg, const BenchArgs& a) {
  gpd::BenchConfig bc = cfg.bench;
  if (!a.variants.empty()) {
    bc.variants.clear();
    for (const auto& v : a.variants) bc.variants.push_back(gpd::parse_variant(v));
  }
  if (a.suite) bc.suite = gpd::parse_difficulty(*a.suite);
  if (a.n_problems) bc.n_problems = *a.n_problems;
  if (!a.portfolio.empty()) bc.portfolio = gpd::load_guide_portfolio(a.portfolio);
  require_writable_parent(a.out);
  if (!a.compare.empty()) require_file(a.compare, "comparison report");

  std::optional<gpd::DenoiserParams> params;
  bool need = false;
  for (auto v : bc.variants) need = need || gpd::needs_checkpoint(v);
  if (need) {
    if (a.checkpoint.empty()) throw gpd::ConfigError("bench: selected variants need --checkpoint");
    require_file(a.checkpoint, "checkpoint");
    params = gpd::load_checkpoint(a.checkpoint);
  }
  const auto report = gpd::run_benchmark(bc, params ? &*params : nullptr);
  gpd::write_report(report, a.out);
  print_summary(report);
  for (const auto& s : report.summaries) {
    if (s.max_problem_time > bc.watchdog_seconds) {
      spdlog::warn("{}: slowest problem took {:.1f} s (watchdog {:.0f} s)", gpd::to_string(s.variant),
                   s.max_problem_time, bc.watchdog_seconds);
    }
  }
  if (!a.compare.empty()) {
    const auto other = gpd::report_from_json(gpd::read_json_file(a.compare));
    const auto diff = gpd::compare_reports(other, report);
    if (diff.empty()) std::printf("no success-rate differences against %s\n", a.compare.c_str());
    for (const auto& d : diff) {
      std::printf("%-8s %s: %.2f -> %.2f (%+.2f, p=%.4f)%s\n", d.variant.c_str(), d.field.c_str(), d.a, d.b, d.delta,
                  d.p_value, d.significant ? " *" : "");
    }
  }
  return kExitOk;
}

// ---- inspect ----

json dataset_json(const gpd::ExpertDataset& d, std::size_t limit) {
  json entries = json::array();
  for (std::size_t i = 0; i < d.size() && i < limit; ++i) {
    json coeffs = json::array();
    for (Eigen::Index r = 0; r < d.coefficients[i].rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < d.coefficients[i].cols(); ++c) row.push_back(d.coefficients[i](r, c));
      coeffs.push_back(row);
    }
    entries.push_back({{"problem", gpd::problem_to_json(d.problems[i])}, {"coefficients", coeffs}});
  }
  std::vector<double> mean(d.stats.mean.data(), d.stats.mean.data() + d.stats.mean.size());
  std::vector<double> scale(d.stats.scale.data(), d.stats.scale.data() + d.stats.scale.size());
  return {{"format", "dataset"},     {"dim", d.dim},
          {"degree", d.degree},      {"horizon", d.horizon},
          {"resolution", d.resolution}, {"count", d.size()},
          {"stats", {{"mean", mean}, {"scale", scale}}}, {"entries", entries}};
}

json checkpoint_json(const gpd::DenoiserParams& p) {
  json layers = json::array();
  for (const auto& w : p.weights) layers.push_back({w.rows(), w.cols()});
  std::vector<double> beta(p.schedule.beta.data(), p.schedule.beta.data() + p.schedule.beta.size());
  return {{"format", "checkpoint"},
          {"dim", p.dim},
          {"degree", p.degree},
          {"horizon", p.horizon},
          {"steps", p.num_steps()},
          {"schedule", gpd::to_string(p.schedule.kind)},
          {"embed_dim", p.arch.embed_dim},
          {"hidden_width", p.arch.hidden_width},
          {"hidden_layers", p.arch.hidden_layers},
          {"activation", p.arch.activation == gpd::Activation::kTanh ? "tanh" : "silu"},
          {"parameters", p.parameter_count()},
          {"layers", layers},
          {"beta", beta}};
}

int cmd_inspect(const gpd::AppConfig& cfg, const std::string& path, std::size_t limit) {
  json out;
  if (path == "config") {
    out = gpd::config_to_json(cfg);
  } else {
    require_file(path, "file");
    char magic[4] = {0, 0, 0, 0};
    {
      std::ifstream in(path, std::ios::binary);
      in.read(magic, 4);
    }
    const std::string m(magic, 4);
    if (m == "PDIF") {
      out = dataset_json(gpd::load_dataset(path), limit);
    } else if (m == "PDMW") {
      out = checkpoint_json(gpd::load_checkpoint(path));
    } else {
      const json j = gpd::read_json_file(path);
      // Recognize the JSON formats by shape and validate them on the way.
      if (j.is_array()) {
        out = {{"format", "portfolio"}, {"guides", json(gpd::load_guide_portfolio(path))}};
      } else if (j.contains("records") && j.contains("summaries")) {
        (void)gpd::report_from_json(j);
        out = j;
      } else if (j.contains("start")) {
        out = gpd::problem_to_json(gpd::problem_from_json(j));
      } else if (j.contains("obstacles")) {
        out = gpd::scene_to_json(gpd::scene_from_json(j));
      } else {
        out = gpd::config_to_json(gpd::config_from_json(j));
      }
    }
  }
  std::printf("%s\n", out.dump(2).c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polynomial diffusion motion planning: data generation, training, planning, benchmarks"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(0, 1);
  app.footer(
      "Config layering: built-in defaults < --config file < --set key=value (dotted keys, e.g.\n"
      "  --set bench.guide.guidance_scale=0.2 --set bench.variants=PD,GPD-1G).\n"
      "Environment: GPD_CONFIG, GPD_SEED, GPD_JOBS, GPD_VERBOSITY mirror the matching flags.\n"
      "Exit codes: 0 success, 1 planning/training failure, 2 usage error, 3 I/O or format error.");

  GlobalOptions g;
  app.add_option("-c,--config", g.config_file, "JSON config file")->envname("GPD_CONFIG");
  app.add_option("--set", g.overrides, "config override key=value (repeatable)")->take_all();
  app.add_option("--seed", g.seed, "master seed")->envname("GPD_SEED");
  app.add_option("-j,--jobs", g.jobs, "worker lanes")->envname("GPD_JOBS");
  app.add_option("-v,--verbosity", g.verbosity, "0 warn, 1 info, 2 debug, 3 trace")
      ->envname("GPD_VERBOSITY")
      ->check(CLI::Range(0, 3));
  app.add_flag("--dump-config", g.dump_config, "print the effective config and exit");

  GenDataArgs gd;
  auto* gen = app.add_subcommand("gen-data", "generate expert demonstrations");
  gen->add_option("-o,--out", gd.out, "dataset file")->required();
  gen->add_option("-n,--count", gd.count, "problems to attempt");
  gen->add_option("--difficulty", gd.difficulties, "difficulties to cycle (empty, sparse, cluttered, narrow-passage)")
      ->delimiter(',');
  gen->add_option("--residuals", gd.residuals_csv, "write per-problem fit residuals as CSV");

  TrainArgs ta;
  auto* tr = app.add_subcommand("train", "train the denoiser");
  tr->add_option("-d,--data", ta.data, "dataset file")->required();
  tr->add_option("-o,--out", ta.out, "checkpoint file")->required();
  tr->add_option("--resume", ta.resume, "continue from this checkpoint");
  tr->add_option("--loss-csv", ta.loss_csv, "loss curve CSV (default <out>.loss.csv)");

  PlanArgs pa;
  auto* pl = app.add_subcommand("plan", "solve one problem with one variant");
  pl->add_option("--checkpoint", pa.checkpoint, "checkpoint file");
  pl->add_option("-s,--scene", pa.scene, "problem JSON, or scene JSON with --start/--goal")->required();
  pl->add_option("--start", pa.start, "start x,y")->delimiter(',')->expected(2);
  pl->add_option("--goal", pa.goal, "goal x,y")->delimiter(',')->expected(2);
  pl->add_option("--variant", pa.variant, "PD, GS, PDS, GPD-1G, GPD-nG, GPDS or RRT-C");
  pl->add_option("-o,--out", pa.out, "solution JSON (default stdout)");
  pl->add_option("--plot", pa.plot, "plot CSV (t,x,y,variant,tag)");
  pl->add_option("--portfolio", pa.portfolio, "guide portfolio JSON for GPD-nG");

  BenchArgs ba;
  auto* be = app.add_subcommand("bench", "run the variant ladder over a generated suite");
  be->add_option("--checkpoint", ba.checkpoint, "checkpoint file");
  be->add_option("-o,--out", ba.out, "report path stem (.json and .csv are appended)");
  be->add_option("--variants", ba.variants, "comma-separated variants")->delimiter(',');
  be->add_option("--suite", ba.suite, "empty, sparse, cluttered or narrow-passage");
  be->add_option("-n,--problems", ba.n_problems, "number of problems");
  be->add_option("--portfolio", ba.portfolio, "guide portfolio JSON for GPD-nG");
  be->add_option("--compare", ba.compare, "earlier report JSON to diff against");

  std::string inspect_path;
  std::size_t inspect_limit = 10;
  auto* in = app.add_subcommand("inspect", "dump a dataset, checkpoint, scene, problem, portfolio, report or config "
                                           "file as JSON ('config' prints the effective config)");
  in->add_option("file", inspect_path, "file to dump")->required();
  in->add_option("--limit", inspect_limit, "dataset entries to include");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  set_verbosity(g.verbosity);

  try {
    const gpd::AppConfig cfg = resolve_config(g);
    if (g.dump_config) {
      std::printf("%s\n", gpd::config_to_json(cfg).dump(2).c_str());
      return kExitOk;
    }
    if (*gen) return cmd_gen_data(cfg, gd);
    if (*tr) return cmd_train(cfg, ta);
    if (*pl) return cmd_plan(cfg, pa);
    if (*be) return cmd_bench(cfg, ba);
    if (*in) return cmd_inspect(cfg, inspect_path, inspect_limit);
    std::fprintf(stderr, "A subcommand is required\nRun with --help for more information.\n");
  } catch (const gpd::IoError& e) {
    spdlog::error("{}", e.what());
    return kExitIo;
  } catch (const gpd::ConfigError& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitPlanningFailure;
  }
  return kExitUsage;
}
