#include "gpd/trainer.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "gpd/errors.hpp"
#include "gpd/random.hpp"

namespace gpd {
namespace {

struct Batch {
  Eigen::MatrixXd inputs;
  Eigen::VectorXd times;
  Eigen::MatrixXd noise;
  Eigen::MatrixXd mask;
};

Eigen::MatrixXd normalized_matrix(const ExpertDataset& dataset, const NormalizationStats& stats) {
  const int d = dataset.dim * (dataset.degree + 1);
  Eigen::MatrixXd out(d, static_cast<Eigen::Index>(dataset.size()));
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    out.col(static_cast<Eigen::Index>(i)) = flatten(stats.normalize(dataset.coefficients[i]));
  }
  return out;
}

// Draws (t, eps) per column and forms alpha_t in closed form.
Batch make_batch(const Eigen::MatrixXd& clean, const DiffusionSchedule& schedule, int dim,
                 bool clean_endpoints, Rng& rng) {
  const auto n = clean.cols();
  const auto d = clean.rows();
  Batch b;
  b.noise = standard_normal(rng, d, n);
  b.times.resize(n);
  b.inputs.resize(d, n);
  std::uniform_int_distribution<int> ut(0, schedule.steps() - 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int t = ut(rng);
    b.times(i) = network_time(t, schedule.steps());
    const double ab = schedule.alpha_bar[t];
    b.inputs.col(i) = std::sqrt(ab) * clean.col(i) + std::sqrt(1.0 - ab) * b.noise.col(i);
  }
  if (clean_endpoints) {
    b.mask = Eigen::MatrixXd::Ones(d, n);
    b.mask.topRows(dim).setZero();
    b.mask.bottomRows(dim).setZero();
    b.inputs.topRows(dim) = clean.topRows(dim);
    b.inputs.bottomRows(dim) = clean.bottomRows(dim);
  }
  return b;
}

}  // namespace

int total_train_steps(const TrainConfig& cfg, std::size_t dataset_size) {
  if (cfg.max_steps > 0) return cfg.max_steps;
  const auto per_epoch = (dataset_size + cfg.batch_size - 1) / static_cast<std::size_t>(cfg.batch_size);
  return static_cast<int>(std::max<std::size_t>(1, per_epoch) * cfg.epochs);
}

DenoiserParams train(const ExpertDataset& dataset, const ModelConfig& model, const TrainConfig& cfg,
                     TrainReport* report, const std::function<void(const LossRecord&)>& on_report) {
  if (dataset.size() == 0) throw std::invalid_argument("train: dataset is empty");
  Architecture arch = model.arch;
  arch.input_dim = dataset.dim * (dataset.degree + 1);
  NormalizationStats stats =
      dataset.stats.mean.size() == dataset.dim ? dataset.stats : compute_stats(dataset.coefficients);
  DenoiserParams params = init_denoiser(dataset.dim, dataset.degree, dataset.horizon, arch,
                                        make_schedule(model.steps, model.schedule, model.linear), std::move(stats),
                                        derive_seed(cfg.seed, {0xd1}));
  return train_from(std::move(params), dataset, cfg, report, on_report);
}

DenoiserParams train_from(DenoiserParams params, const ExpertDataset& dataset, const TrainConfig& cfg,
                          TrainReport* report, const std::function<void(const LossRecord&)>& on_report) {
  if (dataset.size() == 0) throw std::invalid_argument("train: dataset is empty");
  if (cfg.batch_size < 1 || !(cfg.learning_rate > 0.0) || cfg.report_interval < 1 ||
      (cfg.max_steps <= 0 && cfg.epochs < 1)) {
    throw std::invalid_argument("train: batch size, learning rate, epochs and report interval must be positive");
  }
  if (dataset.dim != params.dim || dataset.degree != params.degree) {
    throw std::invalid_argument("train: dataset shape does not match the model");
  }
  params.validate();

  const Eigen::MatrixXd clean = normalized_matrix(dataset, params.stats);
  const int total = total_train_steps(cfg, dataset.size());
  Rng rng(derive_seed(cfg.seed, {0x7a1}));
  std::uniform_int_distribution<Eigen::Index> pick(0, clean.cols() - 1);

  Gradients grad = Gradients::zeros_like(params);
  Gradients m1 = Gradients::zeros_like(params);
  Gradients m2 = Gradients::zeros_like(params);
  DenoiserParams ema = params;
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;

  TrainReport local;
  local.total_steps = total;
  double interval_sum = 0.0;
  int interval_count = 0;
  Eigen::MatrixXd selected(clean.rows(), cfg.batch_size);

  for (int step = 1; step <= total; ++step) {
    for (int i = 0; i < cfg.batch_size; ++i) selected.col(i) = clean.col(pick(rng));
    const Batch batch = make_batch(selected, params.schedule, params.dim, cfg.clean_endpoints, rng);
    const double loss = denoiser_loss(params, batch.inputs, batch.times, batch.noise, &grad,
                                      cfg.clean_endpoints ? &batch.mask : nullptr);
    if (!std::isfinite(loss)) {
      std::ostringstream msg;
      msg << "train: non-finite loss at step " << step << " (lr " << cfg.learning_rate
          << ", last interval mean " << (interval_count ? interval_sum / interval_count : 0.0) << ")";
      throw TrainingError(msg.str());
    }
    interval_sum += loss;
    ++interval_count;

    const double progress = static_cast<double>(step - 1) / std::max(1, total - 1);
    const double lr = cfg.learning_rate *
                      (cfg.final_lr_fraction +
                       (1.0 - cfg.final_lr_fraction) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress)));
    const double c1 = 1.0 - std::pow(kBeta1, step);
    const double c2 = 1.0 - std::pow(kBeta2, step);
    auto adam = [&](auto& param, auto& g, auto& a, auto& b) {
      a = kBeta1 * a + (1.0 - kBeta1) * g;
      b = kBeta2 * b + (1.0 - kBeta2) * g.cwiseProduct(g);
      param.array() -= lr * (a.array() / c1) / ((b.array() / c2).sqrt() + kEps);
    };
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
      adam(params.weights[l], grad.weights[l], m1.weights[l], m2.weights[l]);
      adam(params.biases[l], grad.biases[l], m1.biases[l], m2.biases[l]);
    }
    if (cfg.ema_decay > 0.0) {
      for (std::size_t l = 0; l < params.weights.size(); ++l) {
        ema.weights[l] = cfg.ema_decay * ema.weights[l] + (1.0 - cfg.ema_decay) * params.weights[l];
        ema.biases[l] = cfg.ema_decay * ema.biases[l] + (1.0 - cfg.ema_decay) * params.biases[l];
      }
    }
    if (step % cfg.report_interval == 0 || step == total) {
      LossRecord record{step, interval_sum / interval_count};
      local.curve.push_back(record);
      if (on_report) on_report(record);
      interval_sum = 0.0;
      interval_count = 0;
    }
  }
  if (report) *report = std::move(local);
  if (cfg.ema_decay > 0.0) return ema;
  return params;
}

double evaluate_loss(const DenoiserParams& params, const ExpertDataset& dataset, std::uint64_t seed,
                     int draws_per_sample) {
  if (dataset.size() == 0) throw std::invalid_argument("evaluate_loss: dataset is empty");
  const Eigen::MatrixXd clean = normalized_matrix(dataset, params.stats);
  Rng rng(derive_seed(seed, {0xe7a1}));
  double sum = 0.0;
  for (int k = 0; k < draws_per_sample; ++k) {
    const Batch batch = make_batch(clean, params.schedule, params.dim, false, rng);
    sum += denoiser_loss(params, batch.inputs, batch.times, batch.noise, nullptr);
  }
  return sum / draws_per_sample;
}

}  // namespace gpd
