// Acceptance run: one PASS/FAIL line per criterion. Builds (or reuses) a
// cached expert dataset and checkpoint under --cache.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"

#include "gpd/bench.hpp"
#include "gpd/bernstein.hpp"
#include "gpd/config.hpp"
#include "gpd/costs.hpp"
#include "gpd/dataset.hpp"
#include "gpd/denoiser.hpp"
#include "gpd/guidance.hpp"
#include "gpd/random.hpp"
#include "gpd/sampler.hpp"
#include "gpd/schedule.hpp"
#include "gpd/trainer.hpp"

using namespace gpd;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  int id;
  bool pass;
  std::string detail;
};
std::vector<Verdict> verdicts;

void report(int id, bool pass, const std::string& detail) {
  verdicts.push_back({id, pass, detail});
  std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
}

template <class... A>
std::string strf(const char* f, A... a) {
  char buf[1024];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Infinity-norm relative error between an analytic and a numeric gradient.
double rel_error(const Eigen::MatrixXd& g, const Eigen::MatrixXd& fd) {
  const double scale = std::max({fd.cwiseAbs().maxCoeff(), g.cwiseAbs().maxCoeff(), 1e-12});
  return (g - fd).cwiseAbs().maxCoeff() / scale;
}

// ---------------------------------------------------------------------------
// Independent collision oracle: closed-form distances, fine fixed spacing.

double oracle_clearance(const Scene& s, const Point& p) {
  const auto& w = s.workspace;
  double best = std::min({p.x() - w.min.x(), w.max.x() - p.x(), p.y() - w.min.y(), w.max.y() - p.y()});
  for (const auto& o : s.obstacles) {
    double d;
    if (const auto* c = std::get_if<Circle>(&o)) {
      d = std::hypot(p.x() - c->center.x(), p.y() - c->center.y()) - c->radius;
    } else {
      const auto& b = std::get<Box>(o);
      const double dx = std::max({b.min.x() - p.x(), 0.0, p.x() - b.max.x()});
      const double dy = std::max({b.min.y() - p.y(), 0.0, p.y() - b.max.y()});
      if (dx == 0.0 && dy == 0.0) {
        d = -std::min({p.x() - b.min.x(), b.max.x() - p.x(), p.y() - b.min.y(), b.max.y() - p.y()});
      } else {
        d = std::hypot(dx, dy);
      }
    }
    best = std::min(best, d);
  }
  return best;
}

bool oracle_free(const Scene& s, const Trajectory& traj, double spacing = 0.002) {
  for (Eigen::Index k = 0; k < traj.cols(); ++k) {
    const Point a = traj.col(k);
    const Point b = k + 1 < traj.cols() ? Point(traj.col(k + 1)) : a;
    const int n = std::max(1, static_cast<int>(std::ceil((b - a).norm() / spacing)));
    for (int i = 0; i <= n; ++i) {
      if (oracle_clearance(s, a + (b - a) * (static_cast<double>(i) / n)) < s.robot_radius) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------

void criterion1() {
  const auto t0 = Clock::now();
  Rng rng(101);
  std::uniform_int_distribution<int> uc(1, 10);
  double pu = 0.0, ep = 0.0, fit = 0.0;
  int instances = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int c = uc(rng);
    const int h = std::uniform_int_distribution<int>(c + 1, 200)(rng);
    BernsteinTransform b(c, h);
    pu = std::max(pu, (b.matrix().colwise().sum().array() - 1.0).abs().maxCoeff());
    const ControlPoints alpha = standard_normal(rng, 2, c + 1);
    const Trajectory tau = b.evaluate(alpha);
    ep = std::max({ep, (tau.col(0) - alpha.col(0)).cwiseAbs().maxCoeff(),
                   (tau.col(h - 1) - alpha.col(c)).cwiseAbs().maxCoeff()});
    fit = std::max(fit, (b.fit(tau) - alpha).cwiseAbs().maxCoeff());
    ++instances;
  }
  const double secs = since(t0);
  report(1, pu <= 1e-12 && ep <= 1e-14 && fit <= 1e-9 && secs < 10.0,
         strf("%d instances (c<=10, H<=200): partition %.2e (<=1e-12), endpoints %.2e (<=1e-14), fit %.2e (<=1e-9), "
             "%.2f s (<10 s)",
             instances, pu, ep, fit, secs));
}

void criterion2() {
  const auto t0 = Clock::now();
  Rng rng(202);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int kInstances = 100;

  // preconditioned gradient: d/dalpha of f(alpha B), f quadratic with random weights
  double pre = 0.0;
  for (int i = 0; i < kInstances; ++i) {
    const int c = std::uniform_int_distribution<int>(2, 10)(rng);
    const auto b = build_transform(c, 50);
    const Eigen::MatrixXd w = standard_normal(rng, 2, 50);
    const ControlPoints alpha = standard_normal(rng, 2, c + 1);
    auto f = [&](const ControlPoints& a) {
      const Trajectory t = b->evaluate(a);
      return 0.5 * (w.array() * t.array().square()).sum();
    };
    const Eigen::MatrixXd grad_q = (w.array() * b->evaluate(alpha).array()).matrix();
    const ControlPoints g = precondition_gradient(*b, grad_q);
    ControlPoints fd(2, c + 1);
    const double h = 1e-6;
    for (Eigen::Index k = 0; k < alpha.size(); ++k) {
      ControlPoints ap = alpha, am = alpha;
      ap.data()[k] += h;
      am.data()[k] -= h;
      fd.data()[k] = (f(ap) - f(am)) / (2 * h);
    }
    pre = std::max(pre, rel_error(g, fd));
  }

  // collision cost: random cluttered scenes and trajectories near obstacles;
  // instances whose finite differences disagree across step sizes sit on a kink
  double col = 0.0;
  int col_n = 0, col_kinks = 0;
  for (int i = 0; col_n < kInstances; ++i) {
    const Scene scene = generate_scene(derive_seed(7, {static_cast<std::uint64_t>(i)}), Difficulty::kCluttered);
    Trajectory t(2, 12);
    for (int k = 0; k < 12; ++k) t.col(k) << u(rng), u(rng);
    const double margin = 0.05;
    const auto r = collision_cost(t, scene, margin);
    if (r.cost == 0.0) continue;
    auto fd_at = [&](double h) {
      Eigen::MatrixXd fd(2, 12);
      for (Eigen::Index k = 0; k < t.size(); ++k) {
        Trajectory a = t, b = t;
        a.data()[k] += h;
        b.data()[k] -= h;
        fd.data()[k] = (collision_cost(a, scene, margin).cost - collision_cost(b, scene, margin).cost) / (2 * h);
      }
      return fd;
    };
    const Eigen::MatrixXd fd1 = fd_at(1e-6), fd2 = fd_at(1e-7);
    if (rel_error(fd1, fd2) > 1e-4) {
      ++col_kinks;
      continue;
    }
    col = std::max(col, rel_error(r.gradient, fd1));
    ++col_n;
  }

  // curvature + acceleration
  double smooth = 0.0;
  for (int i = 0; i < kInstances; ++i) {
    const Trajectory t = standard_normal(rng, 2, 20);
    const SmoothnessWeights w{.accel = u(rng), .curvature = u(rng)};
    const auto r = curvature_accel_cost(t, w);
    Eigen::MatrixXd fd(2, 20);
    const double h = 1e-6;
    for (Eigen::Index k = 0; k < t.size(); ++k) {
      Trajectory a = t, b = t;
      a.data()[k] += h;
      b.data()[k] -= h;
      fd.data()[k] = (curvature_accel_cost(a, w).cost - curvature_accel_cost(b, w).cost) / (2 * h);
    }
    smooth = std::max(smooth, rel_error(r.gradient, fd));
  }

  // training loss on a 3-layer toy network, every parameter
  double net = 0.0;
  for (int i = 0; i < kInstances; ++i) {
    Architecture a;
    a.input_dim = 8;
    a.embed_dim = 8;
    a.hidden_width = 12;
    a.hidden_layers = 3;
    NormalizationStats st;
    st.mean = Eigen::Vector2d::Zero();
    st.scale = Eigen::Vector2d::Ones();
    const auto p = init_denoiser(2, 3, 10, a, make_schedule(16, ScheduleKind::kCosine), st,
                                 derive_seed(9, {static_cast<std::uint64_t>(i)}));
    const Eigen::MatrixXd x = standard_normal(rng, 8, 4);
    const Eigen::MatrixXd y = standard_normal(rng, 8, 4);
    Eigen::VectorXd times(4);
    for (int k = 0; k < 4; ++k) times(k) = network_time(std::uniform_int_distribution<int>(0, 15)(rng), 16);
    Gradients g = Gradients::zeros_like(p);
    denoiser_loss(p, x, times, y, &g);
    const double h = 1e-6;
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
      Eigen::MatrixXd fdw(p.weights[l].rows(), p.weights[l].cols());
      for (Eigen::Index k = 0; k < fdw.size(); ++k) {
        auto pp = p, pm = p;
        pp.weights[l].data()[k] += h;
        pm.weights[l].data()[k] -= h;
        fdw.data()[k] = (denoiser_loss(pp, x, times, y, nullptr) - denoiser_loss(pm, x, times, y, nullptr)) / (2 * h);
      }
      Eigen::VectorXd fdb(p.biases[l].size());
      for (Eigen::Index k = 0; k < fdb.size(); ++k) {
        auto pp = p, pm = p;
        pp.biases[l](k) += h;
        pm.biases[l](k) -= h;
        fdb(k) = (denoiser_loss(pp, x, times, y, nullptr) - denoiser_loss(pm, x, times, y, nullptr)) / (2 * h);
      }
      net = std::max({net, rel_error(g.weights[l], fdw), rel_error(g.biases[l], fdb)});
    }
  }
  const double secs = since(t0);
  report(2, pre < 1e-5 && col < 1e-5 && smooth < 1e-5 && net < 1e-4 && secs < 120.0,
         strf("%d instances each: precondition %.2e, collision %.2e (%d kink draws resampled), curvature/accel %.2e "
             "(all <1e-5), network loss %.2e (<1e-4), %.1f s (<120 s)",
             kInstances, pre, col, col_kinks, smooth, net, secs));
}

void criterion3(const DenoiserParams& model, const std::vector<PlanningProblem>& problems) {
  const auto t0 = Clock::now();
  // (a) composing the per-step kernel matches the closed-form marginal
  const auto sched = make_schedule(64, ScheduleKind::kCosine);
  Rng rng(303);
  std::normal_distribution<double> normal;
  const int draws = 100000;
  Eigen::VectorXd x0(16);
  for (int d = 0; d < 16; ++d) x0(d) = -1.0 + 2.0 * d / 15.0;
  double worst_mean = 0.0, worst_var = 0.0;
  for (int t : {0, 5, 20, 40, 63}) {
    const double ab = sched.alpha_bar[t];
    double sum = 0.0, sum_sq = 0.0;
    for (int n = 0; n < draws; ++n) {
      Eigen::VectorXd x = x0;
      for (int s = 0; s <= t; ++s) {
        const double b = sched.beta[s];
        for (int d = 0; d < 16; ++d) x(d) = std::sqrt(1.0 - b) * x(d) + std::sqrt(b) * normal(rng);
      }
      // standardize against the closed form and pool the coordinates
      for (int d = 0; d < 16; ++d) {
        const double z = (x(d) - std::sqrt(ab) * x0(d)) / std::sqrt(1.0 - ab);
        sum += z;
        sum_sq += z * z;
      }
    }
    const double n = 16.0 * draws;
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    worst_mean = std::max(worst_mean, std::abs(mean));
    worst_var = std::max(worst_var, std::abs(var - 1.0));
  }
  const bool forward_ok = worst_mean < 0.01 && worst_var < 0.01;

  // (b) overfit a single coefficient set
  ExpertDataset one;
  one.dim = 2;
  one.degree = 7;
  one.horizon = 50;
  ControlPoints a(2, 8);
  a << 0.1, 0.2, 0.35, 0.5, 0.55, 0.7, 0.8, 0.9, 0.1, 0.4, 0.6, 0.55, 0.4, 0.5, 0.7, 0.9;
  one.coefficients.push_back(a);
  one.problems.emplace_back();
  one.stats = compute_stats(one.coefficients);
  ModelConfig mc;
  mc.arch.hidden_width = 64;
  mc.arch.hidden_layers = 2;
  TrainConfig tc;
  tc.max_steps = 2000;
  tc.batch_size = 64;
  tc.learning_rate = 2e-3;
  tc.seed = 5;
  tc.report_interval = 100;
  TrainReport tr;
  train(one, mc, tc, &tr);
  const double final_loss = tr.curve.back().loss;

  // (c) endpoints exact at every reverse step with the trained model
  int violations = 0, checked = 0;
  for (std::size_t i = 0; i < 10 && i < problems.size(); ++i) {
    const auto& p = problems[i];
    const Eigen::VectorXd sn = model.stats.normalize_point(p.start);
    const Eigen::VectorXd gn = model.stats.normalize_point(p.goal);
    GpdOptions opts;
    opts.trace = [&](int, const Eigen::MatrixXd& state) {
      for (Eigen::Index lane = 0; lane < state.cols(); ++lane) {
        const ControlPoints s = unflatten(state.col(lane), model.dim);
        ++checked;
        if (!(s.col(0) == sn) || !(s.col(s.cols() - 1) == gn)) ++violations;
      }
    };
    const auto r = gpd_sample(model, p, {GuideConfig{}}, 8, 40 + i, opts);
    for (const auto& t : r.trajectories) {
      ++checked;
      if (!(t.col(0) == p.start) || !(t.col(t.cols() - 1) == p.goal)) ++violations;
    }
  }
  const double secs = since(t0);
  report(3, forward_ok && final_loss < 0.1 && violations == 0 && checked > 0 && secs < 300.0,
         strf("forward marginal |mean| %.4f, |var-1| %.4f (<0.01, 1e5 draws x 5 steps); single-sample loss %.4f "
             "(<0.1); endpoint violations %d of %d checked states; %.1f s (<300 s)",
             worst_mean, worst_var, final_loss, violations, checked, secs));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance run"};
  std::string cache = "acceptance_cache";
  int n_problems = 200;
  int dataset_attempts = 6500;
  int train_steps = 16000;
  int jobs = 1;
  std::vector<std::string> overrides;
  app.add_option("--cache", cache, "directory for the dataset, checkpoint and report");
  app.add_option("--problems", n_problems, "benchmark problems");
  app.add_option("--dataset-attempts", dataset_attempts, "expert problems attempted");
  app.add_option("--train-steps", train_steps, "training steps");
  app.add_option("-j,--jobs", jobs, "benchmark worker lanes");
  app.add_option("--set", overrides, "config override key=value (repeatable)");
  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::warn);
  fs::create_directories(cache);

  criterion1();
  criterion2();

  // dataset + checkpoint, reused across runs
  AppConfig cfg = load_layered_config(std::nullopt, overrides);
  cfg.seed = 2024;
  cfg.data.count = static_cast<std::size_t>(dataset_attempts);
  cfg.train.max_steps = train_steps;
  cfg.train.seed = 2024;
  const fs::path data_path = fs::path(cache) / "dataset.bin";
  const fs::path model_path = fs::path(cache) / "model.ckpt";
  double data_secs = 0.0, train_secs = 0.0;
  bool reused = true;
  ExpertDataset dataset;
  if (fs::exists(data_path)) {
    dataset = load_dataset(data_path);
  } else {
    reused = false;
    const auto t0 = Clock::now();
    DatasetYield y;
    dataset = generate_dataset(cfg.data, cfg.seed, &y);
    save_dataset(dataset, data_path);
    data_secs = since(t0);
    std::printf("dataset: %zu of %zu accepted in %.1f s\n", y.accepted, y.attempted, data_secs);
  }
  DenoiserParams model;
  if (fs::exists(model_path)) {
    model = load_checkpoint(model_path);
  } else {
    reused = false;
    const auto t0 = Clock::now();
    TrainReport tr;
    model = train(dataset, cfg.model, cfg.train, &tr);
    save_checkpoint(model, model_path);
    train_secs = since(t0);
    std::printf("training: %d steps in %.1f s, loss %.4f -> %.4f\n", tr.total_steps, train_secs,
                tr.curve.front().loss, tr.curve.back().loss);
  }
  std::printf("model: %zu parameters, T=%d, dataset %zu entries\n", model.parameter_count(), model.num_steps(),
              dataset.size());

  BenchConfig bc = cfg.bench;
  bc.suite = Difficulty::kCluttered;
  bc.n_problems = n_problems;
  bc.jobs = jobs;
  bc.variants = {Variant::kPD, Variant::kGS, Variant::kPDS, Variant::kGPD1G, Variant::kGPDS, Variant::kRRTC};
  const auto problems = benchmark_problems(bc);

  criterion3(model, problems);

  // the benchmark, observing every outcome for the oracle and smoothness checks
  int stitched_success = 0, stitched_oracle_fail = 0, claimed_oracle_fail = 0;
  std::vector<double> gpd_mssd, rrt_mssd;
  std::map<std::string, int> oracle_fail_by_variant;
  const auto bench_t0 = Clock::now();
  const BenchReport rep = run_benchmark(bc, &model, [&](int, const PlanningProblem& p, const std::vector<PlanOutcome>& outs) {
    double g = -1.0, r = -1.0;
    for (const auto& o : outs) {
      const Variant v = o.record.variant;
      if (o.stitch && o.stitch->success()) {
        ++stitched_success;
        if (!oracle_free(p.scene, path_to_matrix(o.stitch->waypoints))) ++stitched_oracle_fail;
      }
      if (o.record.success && !oracle_free(p.scene, o.trajectory)) {
        ++claimed_oracle_fail;
        ++oracle_fail_by_variant[to_string(v)];
      }
      if (v == Variant::kGPD1G) g = o.record.mssd;
      if (v == Variant::kRRTC && o.record.claimed) r = o.record.mssd;
    }
    if (g >= 0.0 && r >= 0.0) {
      gpd_mssd.push_back(g);
      rrt_mssd.push_back(r);
    }
  });
  const double bench_secs = since(bench_t0);
  write_report(rep, fs::path(cache) / "bench_report");
  std::printf("\n%-8s %8s %8s %10s %10s %10s\n", "variant", "success", "SR(%)", "median(s)", "D(s)", "S(s)");
  for (const auto& s : rep.summaries) {
    std::printf("%-8s %4d/%-3d %8.2f %10.4f %10.4f %10.4f\n", to_string(s.variant).c_str(), s.successes, s.problems,
                s.success_rate, s.median_time, s.median_denoise, s.median_stitch);
  }
  std::printf("\n");
  auto sr = [&](Variant v) { return rep.summary(v)->success_rate; };

  const double pipeline_secs = data_secs + train_secs + bench_secs;
  report(4, dataset.size() >= 5000 && sr(Variant::kGPD1G) >= sr(Variant::kPD) + 10.0 && pipeline_secs < 1200.0,
         strf("%d cluttered problems, %zu expert samples: PD %.2f%% -> GPD-1G %.2f%% (need +10); data %.0f s + "
             "training %.0f s%s + benchmark %.0f s = %.0f s (<1200 s)",
             n_problems, dataset.size(), sr(Variant::kPD), sr(Variant::kGPD1G), data_secs, train_secs,
             reused ? " (cached)" : "", bench_secs, pipeline_secs));

  const double gs = sr(Variant::kGS), pds = sr(Variant::kPDS), gpds = sr(Variant::kGPDS);
  report(5, pds - gs >= 5.0 && gpds - pds >= 5.0 && gpds >= sr(Variant::kGPD1G),
         strf("GS %.2f%% < PDS %.2f%% < GPDS %.2f%% (gaps %.2f, %.2f; need >=5); GPDS >= GPD-1G %.2f%%", gs, pds, gpds,
             pds - gs, gpds - pds, sr(Variant::kGPD1G)));

  for (const auto& [name, n] : oracle_fail_by_variant) std::printf("oracle rejected %d %s successes\n", n, name.c_str());
  double slowest = 0.0;
  for (const auto& s : rep.summaries) slowest = std::max(slowest, s.max_problem_time);
  report(6, stitched_oracle_fail == 0 && claimed_oracle_fail == 0 && slowest < bc.watchdog_seconds,
         strf("%d stitched successes, %d fail the independent oracle; %d oracle failures among all successes; "
             "slowest problem %.2f s (watchdog %.0f s)",
             stitched_success, stitched_oracle_fail, claimed_oracle_fail, slowest, bc.watchdog_seconds));

  // speed structure: D + S split and T = 64 vs the same sampler forced to T = 256
  {
    bool decomposed = true;
    for (const auto& r : rep.records) {
      if (r.variant == Variant::kGPDS) decomposed = decomposed && r.total_time + 1e-9 >= r.denoise_time + r.stitch_time;
    }
    const auto long_sched = make_schedule(256, model.schedule.kind);
    std::vector<double> d64, d256;
    for (int i = 0; i < 20; ++i) {
      const auto& p = problems[i];
      GpdOptions o;
      o.k_pool = bc.k_pool;
      auto t0 = Clock::now();
      gpd_sample(model, p, {bc.guide}, bc.batch, 900 + i, o);
      d64.push_back(since(t0));
      o.schedule = &long_sched;
      t0 = Clock::now();
      gpd_sample(model, p, {bc.guide}, bc.batch, 900 + i, o);
      d256.push_back(since(t0));
    }
    const auto* s = rep.summary(Variant::kGPDS);
    const double ratio = median(d256) / median(d64);
    report(7, decomposed && ratio >= 3.0,
           strf("GPDS median %.3f s = %.3f D + %.3f S; GPD-1G denoising median T=64 %.4f s vs T=256 %.4f s "
               "(%.2fx, need >=3x)",
               s->median_time, s->median_denoise, s->median_stitch, median(d64), median(d256), ratio));
  }

  // smoothness along the reverse process and against raw RRT-Connect
  {
    const auto b = build_transform(model.degree, model.horizon);
    std::map<int, std::pair<double, double>> per_step;  // t -> (sum gpd mssd, sum noise mssd)
    std::map<int, int> counts;
    Rng rng(808);
    for (int i = 0; i < 20; ++i) {
      GpdOptions o;
      o.trace = [&](int t, const Eigen::MatrixXd& state) {
        if (t < 0) return;
        for (Eigen::Index lane = 0; lane < state.cols(); ++lane) {
          const Trajectory traj = b->evaluate(model.stats.denormalize(unflatten(state.col(lane), model.dim)));
          Trajectory noise(traj.rows(), traj.cols());
          for (Eigen::Index r = 0; r < traj.rows(); ++r) {
            const double mean = traj.row(r).mean();
            const double sd = std::sqrt((traj.row(r).array() - mean).square().mean());
            std::normal_distribution<double> nd(0.0, sd);
            for (Eigen::Index k = 0; k < traj.cols(); ++k) noise(r, k) = nd(rng);
          }
          per_step[t].first += mean_squared_second_difference(traj);
          per_step[t].second += mean_squared_second_difference(noise);
          ++counts[t];
        }
      };
      gpd_sample(model, problems[i], {bc.guide}, 8, 700 + i, o);
    }
    double worst_ratio = std::numeric_limits<double>::infinity();
    for (const auto& [t, sums] : per_step) worst_ratio = std::min(worst_ratio, sums.second / sums.first);
    const double g = std::accumulate(gpd_mssd.begin(), gpd_mssd.end(), 0.0) / std::max<std::size_t>(1, gpd_mssd.size());
    const double r = std::accumulate(rrt_mssd.begin(), rrt_mssd.end(), 0.0) / std::max<std::size_t>(1, rrt_mssd.size());
    report(8, worst_ratio >= 5.0 && !gpd_mssd.empty() && r >= 2.0 * g,
           strf("worst step noise/GPD MSSD ratio %.1f over %zu steps (need >=5); final GPD-1G MSSD %.3e vs raw "
               "RRT-Connect %.3e on %zu problems (%.1fx, need >=2x)",
               worst_ratio, per_step.size(), g, r, gpd_mssd.size(), g > 0 ? r / g : 0.0));
  }

  // throughput: single-problem GPD-1G, batch 8
  {
    std::vector<double> times;
    for (int i = 0; i < 30; ++i) {
      const auto t0 = Clock::now();
      const auto res = gpd_sample(model, problems[i % problems.size()], {bc.guide}, 8, 500 + i);
      (void)res.best();
      times.push_back(since(t0));
    }
    const double med = median(times);
    report(9, med < 1.0,
           strf("GPD-1G single plan (T=64, batch 8) median %.1f ms (%.1f Hz); target <250 ms %s, hard limit 1 s",
               1e3 * med, 1.0 / med, med < 0.25 ? "met" : "missed"));
  }

  std::printf("bench wall time %.1f s\n", bench_secs);
  int failed = 0;
  for (const auto& v : verdicts) failed += v.pass ? 0 : 1;
  std::printf("%d of %zu criteria passed\n", static_cast<int>(verdicts.size()) - failed, verdicts.size());
  return failed == 0 ? 0 : 1;
}
