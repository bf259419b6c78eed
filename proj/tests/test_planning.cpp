#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "gpd/bench.hpp"
#include "gpd/config.hpp"
#include "gpd/costs.hpp"
#include "gpd/errors.hpp"
#include "gpd/guidance.hpp"
#include "gpd/random.hpp"
#include "gpd/scene_io.hpp"
#include "gpd/sampler.hpp"
#include "gpd/stitching.hpp"

using namespace gpd;

namespace {

DenoiserParams small_params(std::uint64_t seed) {
  Architecture a;
  a.input_dim = 16;
  a.embed_dim = 8;
  a.hidden_width = 16;
  a.hidden_layers = 2;
  NormalizationStats s;
  s.mean = Eigen::Vector2d(0.5, 0.5);
  s.scale = Eigen::Vector2d(0.5, 0.5);
  return init_denoiser(2, 7, 50, a, make_schedule(16, ScheduleKind::kCosine), s, seed);
}

// Two circles on the straight line; each trajectory dodges one of them.
PlanningProblem two_circle_problem() {
  PlanningProblem p;
  p.scene.robot_radius = 0.02;
  p.scene.obstacles.push_back(Circle{Point(0.3, 0.5), 0.06});
  p.scene.obstacles.push_back(Circle{Point(0.7, 0.5), 0.06});
  p.start = Point(0.05, 0.5);
  p.goal = Point(0.95, 0.5);
  return p;
}

Trajectory bump_trajectory(double bump_x) {
  Trajectory t(2, 50);
  for (int k = 0; k < 50; ++k) {
    const double x = 0.05 + 0.9 * k / 49.0;
    const double d = (x - bump_x) / 0.08;
    const double taper = 1.0 - std::pow((x - 0.5) / 0.45, 8);
    t.col(k) << x, 0.5 + 0.2 * std::exp(-d * d) * taper;
  }
  return t;
}

}  // namespace

TEST_CASE("collision cost gradient matches central differences") {
  const PlanningProblem p = two_circle_problem();
  Rng rng(3);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    Trajectory t(2, 10);
    for (int k = 0; k < 10; ++k) t.col(k) << u(rng), u(rng);
    const auto r = collision_cost(t, p.scene, 0.05);
    const double h = 1e-7;
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      Trajectory a = t, b = t;
      a.data()[i] += h;
      b.data()[i] -= h;
      const double fd = (collision_cost(a, p.scene, 0.05).cost - collision_cost(b, p.scene, 0.05).cost) / (2 * h);
      worst = std::max(worst, std::abs(fd - r.gradient.data()[i]) / std::max(1.0, std::abs(fd)));
    }
  }
  CHECK(worst < 1e-5);
  Scene roomy;
  roomy.workspace = Box{Point(-1, -1), Point(2, 2)};
  CHECK(collision_cost(bump_trajectory(0.3), roomy, 0.05).cost == 0.0);
  CHECK_THROWS_AS(collision_cost(bump_trajectory(0.3), p.scene, 0.0), std::invalid_argument);
}

TEST_CASE("smoothness cost gradient matches central differences") {
  Rng rng(4);
  const SmoothnessWeights w{.accel = 1.0, .curvature = 0.5};
  double worst = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    const Trajectory t = standard_normal(rng, 2, 12);
    const auto r = curvature_accel_cost(t, w);
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      Trajectory a = t, b = t;
      a.data()[i] += h;
      b.data()[i] -= h;
      const double fd = (curvature_accel_cost(a, w).cost - curvature_accel_cost(b, w).cost) / (2 * h);
      worst = std::max(worst, std::abs(fd - r.gradient.data()[i]) / std::max(1.0, std::abs(fd)));
    }
  }
  CHECK(worst < 1e-5);
  Trajectory line(2, 5);
  line << 0, 1, 2, 3, 4, 0, 1, 2, 3, 4;
  CHECK(curvature_accel_cost(line, w).cost < 1e-20);
}

TEST_CASE("guide config json and portfolio") {
  GuideConfig g;
  g.scale_schedule = {0.1, 0.2};
  nlohmann::json j = g;
  CHECK(j.get<GuideConfig>().scale_schedule == g.scale_schedule);
  j["bogus"] = 1;
  CHECK_THROWS_AS(j.get<GuideConfig>(), ConfigError);
  const auto pf = default_guide_portfolio(GuideConfig{});
  CHECK(pf.size() == 7);
  const auto path = std::filesystem::temp_directory_path() / "gpd_portfolio.json";
  save_guide_portfolio(pf, path);
  CHECK(load_guide_portfolio(path).size() == 7);
  std::filesystem::remove(path);
  CHECK(g.margin_at(15, 16) == doctest::Approx(2.0));
  CHECK(g.margin_at(0, 16) == doctest::Approx(1.0));
}

TEST_CASE("guidance shift lowers the collision cost of the decoded trajectory") {
  const auto params = small_params(1);
  const PlanningProblem p = two_circle_problem();
  const auto b = build_transform(7, 50);
  // straight line through both circles
  ControlPoints alpha(2, 8);
  for (int c = 0; c < 8; ++c) alpha.col(c) << 0.05 + 0.9 * c / 7.0, 0.5 + 0.01 * c;
  const ControlPoints norm = params.stats.normalize(alpha);
  GuideConfig g;
  g.guidance_scale = 0.01;
  const auto shift = guidance_shift(params, *b, g, p.scene, norm, 0, 16);
  REQUIRE(shift);
  CHECK(shift->col(0).norm() == 0.0);
  CHECK(shift->col(7).norm() == 0.0);
  const double before = collision_cost(b->evaluate(alpha), p.scene, g.safety_margin).cost;
  const double after =
      collision_cost(b->evaluate(params.stats.denormalize(norm - *shift)), p.scene, g.safety_margin).cost;
  CHECK(after < before);
  g.guidance_scale = 0.0;
  CHECK_FALSE(guidance_shift(params, *b, g, p.scene, norm, 0, 16));
}

TEST_CASE("gpd_sample is deterministic with exact endpoints") {
  const auto params = small_params(2);
  const PlanningProblem p = two_circle_problem();
  GpdOptions opts;
  opts.k_pool = 3;
  const std::vector<GuideConfig> guides{GuideConfig{}, default_guide_portfolio(GuideConfig{})[1]};
  const auto a = gpd_sample(params, p, guides, 4, 9, opts);
  const auto b = gpd_sample(params, p, guides, 4, 9, opts);
  REQUIRE(a.trajectories.size() == 8);
  CHECK(a.pool.size() == 8 * 3);
  CHECK(a.chosen == b.chosen);
  for (std::size_t i = 0; i < a.trajectories.size(); ++i) {
    CHECK(exactly_equal(a.trajectories[i], b.trajectories[i]));
    CHECK(a.trajectories[i].col(0) == p.start);
    CHECK(a.trajectories[i].col(49) == p.goal);
  }
  CHECK(a.chosen == argmin_index(a.collision_costs));
  CHECK(argmin_index({3.0, 1.0, 1.0}) == 1);
}

TEST_CASE("window_free and stitching across two trajectories") {
  const PlanningProblem p = two_circle_problem();
  const Trajectory a = bump_trajectory(0.3);  // blocked near x = 0.7
  const Trajectory b = bump_trajectory(0.7);  // blocked near x = 0.3
  CHECK(window_free(a, 0, 5, p.scene, 0.01));
  CHECK_FALSE(is_collision_free(p.scene, a, 0.01));
  CHECK_FALSE(is_collision_free(p.scene, b, 0.01));

  StitchPool pool;
  pool.add(a, "a");
  pool.add(b, "b");
  StitchConfig cfg;
  cfg.resolution = 0.01;
  const auto r = stitch(pool, p, cfg, 5);
  REQUIRE(r.success());
  CHECK(r.stitches.size() >= 1);
  CHECK(is_collision_free(p.scene, path_to_matrix(r.waypoints), 0.01));
  CHECK((r.waypoints.front() - p.start.head<2>()).norm() == 0.0);
  CHECK((r.waypoints.back() - p.goal.head<2>()).norm() < 1e-12);
  for (std::size_t i = 1; i < r.waypoints.size(); ++i) {
    CHECK((r.waypoints[i] - r.waypoints[i - 1]).norm() <= cfg.step_bound + 1e-12);
  }
  const auto again = stitch(pool, p, cfg, 5);
  CHECK(again.waypoints == r.waypoints);
  const auto j = stitch_result_to_json(r);
  CHECK(j.at("stitches").size() == r.stitches.size());

  StitchPool single;
  single.add(a, "a");
  CHECK_FALSE(stitch(single, p, cfg, 5).success());
  CHECK(stitch(StitchPool{}, p, cfg, 5).status == StitchStatus::kNoValidTarget);
}

TEST_CASE("benchmark on an empty suite is reproducible and stitching always recovers") {
  const auto params = small_params(3);
  BenchConfig cfg;
  cfg.suite = Difficulty::kEmpty;
  cfg.n_problems = 3;
  cfg.batch = 4;
  cfg.k_pool = 2;
  cfg.variants = all_variants();
  cfg.stitch.max_bridge = 0.0;  // untrained samples can be far from anything useful
  const auto r = run_benchmark(cfg, &params);
  for (const auto& s : r.summaries) {
    CAPTURE(to_string(s.variant));
    // an untrained model can wander outside the workspace; only the stitching variants must recover
    if (s.variant == Variant::kPDS || s.variant == Variant::kGPDS || s.variant == Variant::kRRTC) {
      CHECK(s.successes == 3);
    };
  }
  const auto again = run_benchmark(cfg, &params);
  for (std::size_t i = 0; i < r.records.size(); ++i) CHECK(r.records[i].success == again.records[i].success);
  CHECK(compare_reports(r, again).empty());
  const auto reloaded = report_from_json(report_to_json(r));
  CHECK(reloaded.records.size() == r.records.size());
  CHECK(compare_reports(r, reloaded).empty());
  for (const auto& rec : r.records) CHECK(rec.total_time + 1e-12 >= rec.denoise_time + rec.stitch_time);
  const std::string csv = report_to_csv(r);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(r.records.size()) + 1);

  cfg.suite = Difficulty::kSparse;
  CHECK(benchmark_problems(cfg) == benchmark_problems(cfg));
  CHECK_THROWS_AS(run_benchmark(cfg, nullptr), ConfigError);
  cfg.variants = {Variant::kRRTC};
  CHECK_NOTHROW(run_benchmark(cfg, nullptr));
  BenchReport other = r;
  other.config.suite = Difficulty::kCluttered;
  CHECK_THROWS_AS(compare_reports(r, other), std::invalid_argument);
}

TEST_CASE("variant names and the proportion test") {
  for (auto v : all_variants()) CHECK(parse_variant(to_string(v)) == v);
  CHECK_THROWS_WITH_AS(parse_variant("GPD-2G"), doctest::Contains("GPDS"), std::invalid_argument);
  CHECK(proportion_test_p_value(50, 50, 100) == doctest::Approx(1.0));
  CHECK(proportion_test_p_value(30, 60, 100) < 0.001);
  CHECK(proportion_test_p_value(50, 55, 100) > 0.05);
}

TEST_CASE("layered config: overrides, unknown keys and types") {
  const AppConfig d;
  const auto j = config_to_json(d);
  CHECK(config_to_json(config_from_json(j)) == j);
  auto doc = j;
  apply_override(doc, "bench.batch=8");
  apply_override(doc, "bench.variants=PD,GPDS");
  apply_override(doc, "bench.guide.guidance_scale=0.5");
  apply_override(doc, "bench.suite=narrow-passage");
  const auto c = config_from_json(doc);
  CHECK(c.bench.batch == 8);
  CHECK(c.bench.variants == std::vector<Variant>{Variant::kPD, Variant::kGPDS});
  CHECK(c.bench.guide.guidance_scale == 0.5);
  CHECK(c.bench.suite == Difficulty::kNarrowPassage);
  CHECK_THROWS_AS(apply_override(doc, "bench.nope=1"), ConfigError);
  CHECK_THROWS_AS(apply_override(doc, "novalue"), ConfigError);
  auto bad = j;
  bad["train"]["extra"] = 1;
  CHECK_THROWS_AS(config_from_json(bad), ConfigError);
  bad = j;
  bad["train"]["epochs"] = "many";
  CHECK_THROWS_AS(config_from_json(bad), ConfigError);
  bad = j;
  bad["bench"]["variants"] = {"XX"};
  CHECK_THROWS_AS(config_from_json(bad), ConfigError);

  const auto path = std::filesystem::temp_directory_path() / "gpd_cfg.json";
  write_text_atomic(path, R"({"bench": {"batch": 16}, "seed": 5})");
  const auto layered = load_layered_config(path, {"bench.batch=4"});
  CHECK(layered.bench.batch == 4);
  CHECK(layered.seed == 5);
  write_text_atomic(path, R"({"bench": {"batchh": 16}})");
  CHECK_THROWS_AS(load_layered_config(path, {}), ConfigError);
  std::filesystem::remove(path);
}
