#include "gpd/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gpd {

ScheduleKind parse_schedule_kind(const std::string& name) {
  if (name == "cosine") return ScheduleKind::kCosine;
  if (name == "linear") return ScheduleKind::kLinear;
  throw std::invalid_argument("unknown schedule kind '" + name + "' (expected cosine, linear)");
}

std::string to_string(ScheduleKind kind) {
  return kind == ScheduleKind::kCosine ? "cosine" : "linear";
}

DiffusionSchedule schedule_from_betas(ScheduleKind kind, std::vector<double> beta) {
  const int steps = static_cast<int>(beta.size());
  if (steps < 2) throw std::invalid_argument("schedule: need at least 2 steps");
  DiffusionSchedule s;
  s.kind = kind;
  s.beta = std::move(beta);
  s.alpha_bar.resize(steps);
  s.posterior_variance.resize(steps);
  double running = 1.0;
  for (int t = 0; t < steps; ++t) {
    const double b = s.beta[t];
    if (!(b > 0.0 && b < 1.0)) {
      throw std::invalid_argument("schedule: beta[" + std::to_string(t) + "] outside (0, 1)");
    }
    const double prev = running;
    running *= 1.0 - b;
    s.alpha_bar[t] = running;
    s.posterior_variance[t] = t == 0 ? 0.0 : b * (1.0 - prev) / (1.0 - running);
  }
  if (!(s.alpha_bar.back() < 0.01)) {
    throw std::invalid_argument("schedule: alpha_bar[T-1] = " + std::to_string(s.alpha_bar.back()) +
                                " must be < 0.01");
  }
  return s;
}

DiffusionSchedule make_schedule(int steps, ScheduleKind kind, LinearScheduleEndpoints linear) {
  if (steps < 2) throw std::invalid_argument("make_schedule: T must be >= 2");
  std::vector<double> beta(steps);
  if (kind == ScheduleKind::kCosine) {
    constexpr double kOffset = 0.008;
    auto f = [&](double t) {
      const double c = std::cos((t / steps + kOffset) / (1.0 + kOffset) * std::numbers::pi / 2.0);
      return c * c;
    };
    for (int t = 0; t < steps; ++t) {
      beta[t] = std::min(1.0 - f(t + 1.0) / f(t), 0.999);
    }
  } else {
    const double scale = 1000.0 / steps;
    const double b0 = linear.beta_start > 0.0 ? linear.beta_start : std::min(1e-4 * scale, 0.999);
    const double b1 = linear.beta_end > 0.0 ? linear.beta_end : std::min(0.02 * scale, 0.999);
    for (int t = 0; t < steps; ++t) {
      beta[t] = b0 + (b1 - b0) * t / (steps - 1);
    }
  }
  return schedule_from_betas(kind, std::move(beta));
}

}  // namespace gpd
