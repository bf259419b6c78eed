#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "gpd/dataset.hpp"
#include "gpd/denoiser.hpp"
#include "gpd/errors.hpp"
#include "gpd/random.hpp"
#include "gpd/sampler.hpp"
#include "gpd/schedule.hpp"
#include "gpd/trainer.hpp"

using namespace gpd;

namespace {

Architecture toy_arch(int layers = 2, int width = 16) {
  Architecture a;
  a.input_dim = 8;
  a.embed_dim = 8;
  a.hidden_width = width;
  a.hidden_layers = layers;
  return a;
}

NormalizationStats unit_stats(int dim) {
  NormalizationStats s;
  s.mean = Eigen::VectorXd::Zero(dim);
  s.scale = Eigen::VectorXd::Ones(dim);
  return s;
}

DenoiserParams toy_params(std::uint64_t seed, int layers = 2) {
  return init_denoiser(2, 3, 20, toy_arch(layers), make_schedule(16, ScheduleKind::kCosine), unit_stats(2), seed);
}

ExpertDataset single_sample_dataset() {
  ExpertDataset d;
  d.dim = 2;
  d.degree = 3;
  d.horizon = 20;
  ControlPoints a(2, 4);
  a << 0.1, 0.3, 0.6, 0.9, 0.2, 0.8, 0.7, 0.4;
  d.coefficients.push_back(a);
  PlanningProblem p;
  p.start = a.col(0);
  p.goal = a.col(3);
  d.problems.push_back(p);
  d.stats = compute_stats(d.coefficients);
  return d;
}

}  // namespace

TEST_CASE("schedules satisfy their invariants") {
  for (auto kind : {ScheduleKind::kCosine, ScheduleKind::kLinear}) {
    for (int t : {8, 64, 256}) {
      const auto s = make_schedule(t, kind);
      REQUIRE(s.steps() == t);
      for (int i = 0; i < t; ++i) {
        CHECK(s.beta[i] > 0.0);
        CHECK(s.beta[i] < 1.0);
        if (i > 0) CHECK(s.alpha_bar[i] < s.alpha_bar[i - 1]);
      }
      CHECK(s.alpha_bar[t - 1] < 0.01);
      CHECK(s.posterior_variance[0] == 0.0);
    }
  }
  CHECK(make_schedule(64, ScheduleKind::kCosine).alpha_bar[0] > 0.99);
  CHECK_THROWS_AS(make_schedule(1, ScheduleKind::kCosine), std::invalid_argument);
  CHECK_THROWS_AS(parse_schedule_kind("quadratic"), std::invalid_argument);
}

TEST_CASE("linear schedule with two steps uses the configured endpoints") {
  const auto s = make_schedule(2, ScheduleKind::kLinear, {0.5, 0.999});
  CHECK(s.beta[0] == doctest::Approx(0.5));
  CHECK(s.beta[1] == doctest::Approx(0.999));
  CHECK_THROWS_AS(make_schedule(2, ScheduleKind::kLinear, {0.1, 0.2}), std::invalid_argument);
}

TEST_CASE("forward sample closed form") {
  const auto s = make_schedule(64, ScheduleKind::kCosine);
  Rng rng(1);
  const ControlPoints a0 = standard_normal(rng, 2, 8);
  const ControlPoints zero = ControlPoints::Zero(2, 8);
  CHECK(forward_sample(a0, 10, zero, s).isApprox(std::sqrt(s.alpha_bar[10]) * a0));
  CHECK_THROWS(forward_sample(a0, 64, zero, s));
  CHECK_THROWS(forward_sample(a0, 3, ControlPoints::Zero(2, 7), s));
}

TEST_CASE("endpoint conditioning is idempotent and leaves the interior alone") {
  Rng rng(2);
  const ControlPoints a = standard_normal(rng, 2, 8);
  const Eigen::Vector2d s(1, 2), g(3, 4);
  const ControlPoints c = condition_endpoints(a, s, g);
  CHECK(c.col(0) == s);
  CHECK(c.col(7) == g);
  CHECK(exactly_equal(c.middleCols(1, 6), a.middleCols(1, 6)));
  CHECK(exactly_equal(condition_endpoints(c, s, g), c));
}

TEST_CASE("network forward is deterministic and zero weights give zero output") {
  auto p = toy_params(3);
  Rng rng(4);
  const ControlPoints a = standard_normal(rng, 2, 4);
  CHECK(exactly_equal(denoiser_predict(p, a, 5), denoiser_predict(p, a, 5)));
  for (auto& w : p.weights) w.setZero();
  for (auto& b : p.biases) b.setZero();
  CHECK(denoiser_predict(p, a, 5).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS(denoiser_predict(p, ControlPoints::Zero(2, 5), 0));
}

TEST_CASE("loss gradient matches central differences") {
  const auto p = toy_params(5, 3);
  Rng rng(6);
  const int n = 6;
  const Eigen::MatrixXd x = standard_normal(rng, 8, n);
  const Eigen::MatrixXd y = standard_normal(rng, 8, n);
  Eigen::VectorXd times(n);
  for (int i = 0; i < n; ++i) times(i) = network_time(i, 16);
  Gradients g = Gradients::zeros_like(p);
  denoiser_loss(p, x, times, y, &g);
  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    for (Eigen::Index k = 0; k < p.weights[l].size(); k += 7) {
      auto pp = p, pm = p;
      pp.weights[l].data()[k] += h;
      pm.weights[l].data()[k] -= h;
      const double fd = (denoiser_loss(pp, x, times, y, nullptr) - denoiser_loss(pm, x, times, y, nullptr)) / (2 * h);
      worst = std::max(worst, std::abs(fd - g.weights[l].data()[k]) / std::max(1e-3, std::abs(fd)));
    }
    for (Eigen::Index k = 0; k < p.biases[l].size(); k += 3) {
      auto pp = p, pm = p;
      pp.biases[l](k) += h;
      pm.biases[l](k) -= h;
      const double fd = (denoiser_loss(pp, x, times, y, nullptr) - denoiser_loss(pm, x, times, y, nullptr)) / (2 * h);
      worst = std::max(worst, std::abs(fd - g.biases[l](k)) / std::max(1e-3, std::abs(fd)));
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("masked loss ignores masked entries") {
  const auto p = toy_params(7);
  Rng rng(8);
  const Eigen::MatrixXd x = standard_normal(rng, 8, 3);
  Eigen::MatrixXd y = standard_normal(rng, 8, 3);
  const Eigen::VectorXd times = Eigen::VectorXd::Constant(3, 100.0);
  Eigen::MatrixXd mask = Eigen::MatrixXd::Ones(8, 3);
  mask.row(0).setZero();
  const double before = denoiser_loss(p, x, times, y, nullptr, &mask);
  y.row(0).setConstant(1e6);
  CHECK(denoiser_loss(p, x, times, y, nullptr, &mask) == before);
}

TEST_CASE("checkpoint round-trip and corruption") {
  const auto p = toy_params(9);
  const auto path = std::filesystem::temp_directory_path() / "gpd_test.ckpt";
  save_checkpoint(p, path);
  CHECK(load_checkpoint(path) == p);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.write("XXXX", 4);
  }
  CHECK_THROWS_AS(load_checkpoint(path), IoError);
  save_checkpoint(p, path);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 5);
  CHECK_THROWS_AS(load_checkpoint(path), IoError);
  CHECK_THROWS_AS(load_checkpoint(path.string() + ".missing"), IoError);
  std::filesystem::remove(path);
}

TEST_CASE("training is deterministic and fits a single sample") {
  const auto d = single_sample_dataset();
  ModelConfig m;
  m.arch = toy_arch(2, 32);
  m.steps = 16;
  TrainConfig cfg;
  cfg.max_steps = 600;
  cfg.batch_size = 32;
  cfg.learning_rate = 3e-3;
  cfg.seed = 12;
  TrainReport report;
  const auto a = train(d, m, cfg, &report);
  const auto b = train(d, m, cfg);
  CHECK(a == b);
  REQUIRE(report.curve.size() >= 2);
  CHECK(report.curve.back().loss < report.curve.front().loss);
  cfg.seed = 13;
  CHECK_FALSE(train(d, m, cfg) == a);
  CHECK_THROWS_AS(train(ExpertDataset{}, m, cfg), std::invalid_argument);
}

TEST_CASE("training on a toy expert dataset halves the loss") {
  DatasetGenConfig dc;
  dc.count = 110;
  dc.difficulties = {Difficulty::kSparse};
  const auto d = generate_dataset(dc, 8);
  REQUIRE(d.size() >= 100);
  ModelConfig m;
  m.arch = toy_arch(2, 64);
  TrainConfig cfg;
  cfg.max_steps = 2000;
  cfg.batch_size = 32;
  cfg.report_interval = 100;
  cfg.seed = 5;
  TrainReport report;
  train(d, m, cfg, &report);
  REQUIRE(report.curve.size() >= 2);
  for (const auto& r : report.curve) CHECK(r.loss > 0.0);
  CHECK(report.curve.back().loss < 0.5 * report.curve.front().loss);
}

TEST_CASE("reverse process keeps endpoints fixed and is deterministic per lane") {
  const auto p = toy_params(14);
  const Eigen::Vector2d s(-0.5, 0.2), g(0.7, -0.1);
  ReverseProcessOptions opts;
  bool endpoints_held = true;
  opts.trace = [&](int, const Eigen::MatrixXd& state) {
    for (Eigen::Index lane = 0; lane < state.cols(); ++lane) {
      const ControlPoints a = unflatten(state.col(lane), 2);
      endpoints_held = endpoints_held && a.col(0) == s && a.col(3) == g;
    }
  };
  opts.retain_last = 3;
  const std::vector<std::uint64_t> seeds{lane_seed(5, 0), lane_seed(5, 1), lane_seed(5, 2)};
  const auto r = run_reverse_process(p, s, g, seeds, opts);
  CHECK(endpoints_held);
  REQUIRE(r.final_states.size() == 3);
  CHECK(r.retained.size() == 3);
  CHECK_FALSE(exactly_equal(r.final_states[0], r.final_states[1]));
  // a lane's result does not depend on the batch around it
  const auto solo = run_reverse_process(p, s, g, {seeds[1]});
  CHECK(exactly_equal(solo.final_states[0], r.final_states[1]));

  Rng rng(1);
  const ControlPoints a = Eigen::MatrixXd::Ones(2, 4);
  Rng r1(2), r2(3);
  CHECK(exactly_equal(reverse_step(p, a, 0, p.schedule, r1), reverse_step(p, a, 0, p.schedule, r2)));
  CHECK(reverse_step(p, a, 5, p.schedule, r1).rows() == 2);
}

TEST_CASE("dataset file round-trip and rejection of bad files") {
  DatasetGenConfig cfg;
  cfg.count = 6;
  const auto d = generate_dataset(cfg, 3);
  REQUIRE(d.size() > 0);
  CHECK(generate_dataset(cfg, 3) == d);
  const auto path = std::filesystem::temp_directory_path() / "gpd_test.ds";
  save_dataset(d, path);
  CHECK(load_dataset(path) == d);
  {
    std::ofstream f(path, std::ios::app | std::ios::binary);
    f << "junk";
  }
  CHECK_THROWS_AS(load_dataset(path), IoError);
  std::filesystem::remove(path);
  // every stored fit passes the dense check it was validated with
  const auto b = build_transform(d.degree, d.horizon);
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(is_collision_free(d.problems[i].scene, b->evaluate(d.coefficients[i]), d.resolution));
  }
}

TEST_CASE("normalization stats invert") {
  Rng rng(4);
  std::vector<ControlPoints> cs;
  for (int i = 0; i < 10; ++i) cs.push_back(standard_normal(rng, 2, 8));
  const auto s = compute_stats(cs);
  const ControlPoints n = s.normalize(cs[3]);
  CHECK(n.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
  CHECK(s.denormalize(n).isApprox(cs[3]));
}
