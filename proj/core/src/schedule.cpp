#include "saiplab/schedule.hpp"

#include <cmath>

#include "saiplab/errors.hpp"

namespace saiplab {

NoiseSchedule NoiseSchedule::linear(int steps, double beta_start, double beta_end) {
  if (steps < 1) throw ContractViolation("NoiseSchedule: steps must be >= 1");
  if (!(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0))
    throw ContractViolation("NoiseSchedule: need 0 < beta_start <= beta_end < 1");
  NoiseSchedule s;
  s.beta_.resize(steps);
  s.alpha_bar_.resize(steps);
  double prod = 1.0;
  for (int i = 0; i < steps; ++i) {
    const double frac = steps == 1 ? 0.0 : static_cast<double>(i) / (steps - 1);
    s.beta_[i] = beta_start + frac * (beta_end - beta_start);
    prod *= 1.0 - s.beta_[i];
    s.alpha_bar_[i] = prod;
  }
  return s;
}

double NoiseSchedule::beta(int t) const {
  if (t < 1 || t > steps()) throw ContractViolation("NoiseSchedule::beta: t out of range");
  return beta_[t - 1];
}

double NoiseSchedule::alpha_bar(int t) const {
  if (t < 1 || t > steps()) throw ContractViolation("NoiseSchedule::alpha_bar: t out of range");
  return alpha_bar_[t - 1];
}

NoiseSchedule default_schedule() { return NoiseSchedule::linear(1000, 1e-4, 0.02); }

NoiseSchedule desk_schedule() { return NoiseSchedule::linear(100, 1e-3, 0.2); }

Vector forward_noise(const NoiseSchedule& sched, const Vector& x0, int t, Rng& rng) {
  const double a = sched.alpha_bar(t);
  return std::sqrt(a) * x0 + std::sqrt(1.0 - a) * rng.standard_normal(static_cast<int>(x0.size()));
}

Vector tweedie_denoise(const NoiseSchedule& sched, const DiffusionState& state, const Vector& prior_score) {
  if (prior_score.size() != state.x.size())
    throw ContractViolation("tweedie_denoise: score dimension mismatch");
  const double a = sched.alpha_bar(state.t);
  if (a <= 0.0) throw ContractViolation("tweedie_denoise: alpha_bar must be positive");
  return (state.x + (1.0 - a) * prior_score) / std::sqrt(a);
}

DiffusionState reverse_step(const NoiseSchedule& sched, const DiffusionState& state, const Vector& posterior_score,
                            Rng& rng) {
  if (state.t < 1) throw ContractViolation("reverse_step: t must be >= 1");
  if (posterior_score.size() != state.x.size())
    throw ContractViolation("reverse_step: score dimension mismatch");
  const double b = sched.beta(state.t);
  DiffusionState next;
  next.t = state.t - 1;
  next.x = (state.x + b * posterior_score) / std::sqrt(1.0 - b);
  if (state.t > 1) next.x += std::sqrt(b) * rng.standard_normal(static_cast<int>(state.x.size()));
  return next;
}

}  // namespace saiplab
