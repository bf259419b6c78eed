#include "gpd/sampler.hpp"

#include <cmath>
#include <stdexcept>

namespace gpd {

ControlPoints forward_sample(const ControlPoints& alpha0, int t, const ControlPoints& eps,
                             const DiffusionSchedule& schedule) {
  if (alpha0.rows() != eps.rows() || alpha0.cols() != eps.cols()) {
    throw std::invalid_argument("forward_sample: alpha0 and eps shapes differ");
  }
  if (t < 0 || t >= schedule.steps()) throw std::invalid_argument("forward_sample: t out of range");
  const double ab = schedule.alpha_bar[t];
  return std::sqrt(ab) * alpha0 + std::sqrt(1.0 - ab) * eps;
}

ControlPoints condition_endpoints(const ControlPoints& alpha, const Eigen::VectorXd& start,
                                  const Eigen::VectorXd& goal) {
  if (start.size() != alpha.rows() || goal.size() != alpha.rows()) {
    throw std::invalid_argument("condition_endpoints: start/goal dimension mismatch");
  }
  ControlPoints out = alpha;
  out.col(0) = start;
  out.col(out.cols() - 1) = goal;
  return out;
}

Eigen::MatrixXd posterior_mean(const Eigen::MatrixXd& alpha_t, const Eigen::MatrixXd& eps_hat, int t,
                               const DiffusionSchedule& schedule) {
  const double beta = schedule.beta[t];
  const double coef = beta / std::sqrt(1.0 - schedule.alpha_bar[t]);
  return (alpha_t - coef * eps_hat) / std::sqrt(1.0 - beta);
}

ControlPoints reverse_step(const DenoiserParams& params, const ControlPoints& alpha_t, int t,
                           const DiffusionSchedule& schedule, Rng& rng, const ControlPoints& shift) {
  if (t < 0 || t >= schedule.steps()) throw std::invalid_argument("reverse_step: t out of range");
  if (alpha_t.rows() != params.dim || alpha_t.cols() != params.degree + 1) {
    throw std::invalid_argument("reverse_step: coefficient shape mismatch");
  }
  Eigen::VectorXd times(1);
  times(0) = network_time(t, schedule.steps());
  const Eigen::MatrixXd eps_hat = denoiser_forward(params, flatten(alpha_t), times);
  ControlPoints mu = unflatten(posterior_mean(flatten(alpha_t), eps_hat, t, schedule).col(0), params.dim);
  if (shift.size() > 0) {
    if (shift.rows() != mu.rows() || shift.cols() != mu.cols()) {
      throw std::invalid_argument("reverse_step: shift shape mismatch");
    }
    mu -= shift;
  }
  if (t > 0) mu += std::sqrt(schedule.posterior_variance[t]) * standard_normal(rng, mu.rows(), mu.cols());
  return mu;
}

std::uint64_t lane_seed(std::uint64_t seed, std::size_t lane) { return derive_seed(seed, {0x1a4e, lane}); }

ReverseProcessResult run_reverse_process(const DenoiserParams& params,
                                         const Eigen::VectorXd& start_normalized,
                                         const Eigen::VectorXd& goal_normalized,
                                         const std::vector<std::uint64_t>& lane_seeds,
                                         const ReverseProcessOptions& options) {
  const DiffusionSchedule& schedule = options.schedule ? *options.schedule : params.schedule;
  const int m = params.dim;
  const int d = params.arch.input_dim;
  const auto lanes = static_cast<Eigen::Index>(lane_seeds.size());
  if (start_normalized.size() != m || goal_normalized.size() != m) {
    throw std::invalid_argument("run_reverse_process: start/goal dimension mismatch");
  }
  std::vector<Rng> rngs;
  rngs.reserve(lane_seeds.size());
  for (auto s : lane_seeds) rngs.emplace_back(s);

  auto condition = [&](Eigen::MatrixXd& state) {
    for (Eigen::Index i = 0; i < lanes; ++i) {
      state.col(i).head(m) = start_normalized;
      state.col(i).tail(m) = goal_normalized;
    }
  };

  Eigen::MatrixXd state(d, lanes);
  for (Eigen::Index i = 0; i < lanes; ++i) state.col(i) = standard_normal(rngs[i], d, 1);

  ReverseProcessResult result;
  const int steps = schedule.steps();
  Eigen::VectorXd times = Eigen::VectorXd::Zero(lanes);
  for (int t = steps - 1; t >= 0; --t) {
    condition(state);
    if (options.trace) options.trace(t, state);
    times.setConstant(network_time(t, steps));
    const Eigen::MatrixXd eps_hat = denoiser_forward(params, state, times);
    Eigen::MatrixXd next = posterior_mean(state, eps_hat, t, schedule);
    if (options.guidance) {
      for (Eigen::Index i = 0; i < lanes; ++i) {
        const auto shift = options.guidance(static_cast<int>(i), t, unflatten(state.col(i), m));
        if (shift) next.col(i) -= flatten(*shift);
      }
    }
    if (t > 0) {
      const double sigma = std::sqrt(schedule.posterior_variance[t]);
      for (Eigen::Index i = 0; i < lanes; ++i) next.col(i) += sigma * standard_normal(rngs[i], d, 1);
    }
    state = std::move(next);
    condition(state);
    if (t < options.retain_last) {
      std::vector<ControlPoints> snapshot;
      snapshot.reserve(lanes);
      for (Eigen::Index i = 0; i < lanes; ++i) snapshot.push_back(unflatten(state.col(i), m));
      result.retained.push_back(std::move(snapshot));
    }
  }
  if (options.trace) options.trace(-1, state);
  for (Eigen::Index i = 0; i < lanes; ++i) result.final_states.push_back(unflatten(state.col(i), m));
  return result;
}

std::vector<ControlPoints> sample_prior(const DenoiserParams& params, const PlanningProblem& problem,
                                        int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_prior: batch size must be >= 1");
  std::vector<std::uint64_t> seeds(n);
  for (int i = 0; i < n; ++i) seeds[i] = lane_seed(seed, i);
  const auto run = run_reverse_process(params, params.stats.normalize_point(problem.start),
                                       params.stats.normalize_point(problem.goal), seeds);
  std::vector<ControlPoints> out;
  out.reserve(n);
  for (const auto& s : run.final_states) {
    ControlPoints alpha = params.stats.denormalize(s);
    // Denormalization round-off must not move the conditioned endpoints.
    alpha.col(0) = problem.start;
    alpha.col(alpha.cols() - 1) = problem.goal;
    out.push_back(std::move(alpha));
  }
  return out;
}

}  // namespace gpd
