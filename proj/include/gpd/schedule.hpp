#pragma once

#include <string>
#include <vector>

namespace gpd {

enum class ScheduleKind { kCosine, kLinear };

ScheduleKind parse_schedule_kind(const std::string& name);
std::string to_string(ScheduleKind kind);

/**
 * Variance schedule for T diffusion steps, indexed t = 0..T-1 (t = 0 is the
 * least noisy step). Holds beta_t, the cumulative product alpha_bar_t and the
 * fixed posterior variance of the reverse step.
 */
struct DiffusionSchedule {
  ScheduleKind kind = ScheduleKind::kCosine;
  std::vector<double> beta;
  std::vector<double> alpha_bar;
  std::vector<double> posterior_variance;

  int steps() const { return static_cast<int>(beta.size()); }
  bool operator==(const DiffusionSchedule&) const = default;
};

struct LinearScheduleEndpoints {
  // Non-positive values mean "scale the classic (1e-4, 0.02) pair by 1000/T".
  double beta_start = -1.0;
  double beta_end = -1.0;
};

/// Throws std::invalid_argument for T < 2 or if the result breaks the
/// schedule invariants (0 < beta < 1, alpha_bar strictly decreasing, alpha_bar[T-1] < 0.01).
DiffusionSchedule make_schedule(int steps, ScheduleKind kind, LinearScheduleEndpoints linear = {});

/// Rebuilds the derived arrays from beta and re-validates.
DiffusionSchedule schedule_from_betas(ScheduleKind kind, std::vector<double> beta);

}  // namespace gpd
