#pragma once

#include "saiplab/linalg.hpp"
#include "saiplab/rng.hpp"

namespace saiplab {

/// Discrete DDPM noise schedule: per-step noise rates beta_t and the
/// cumulative products alpha_bar_t = prod_{s<=t} (1 - beta_s), t = 1..T.
class NoiseSchedule {
 public:
  /// Linearly interpolated beta between beta_start and beta_end.
  /// Requires 0 < beta_start <= beta_end < 1 and T >= 1.
  static NoiseSchedule linear(int steps, double beta_start, double beta_end);

  int steps() const { return static_cast<int>(beta_.size()); }
  double beta(int t) const;
  double alpha_bar(int t) const;

 private:
  Vector beta_, alpha_bar_;
};

/// Standard desk-scale defaults. T = 1000 with beta in [1e-4, 0.02] is the
/// common full-size schedule; the 100-step variant scales beta by 10x so the
/// terminal alpha_bar stays ~4e-5 and chains can still start from N(0, I).
NoiseSchedule default_schedule();
NoiseSchedule desk_schedule();

/// Noisy latent plus its timestep; t == 0 denotes a finished sample.
struct DiffusionState {
  Vector x;
  int t = 0;
};

/// x_t = sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) eps.
Vector forward_noise(const NoiseSchedule& sched, const Vector& x0, int t, Rng& rng);

/// Posterior-mean denoiser recovered from the prior score:
/// x0_hat = (x_t + (1 - alpha_bar_t) * score) / sqrt(alpha_bar_t).
Vector tweedie_denoise(const NoiseSchedule& sched, const DiffusionState& state, const Vector& prior_score);

/// One ancestral update driven by a (combined) posterior score:
/// x_{t-1} = (x_t + beta_t * score) / sqrt(1 - beta_t) + sqrt(beta_t) * eps,
/// with eps = 0 on the final step t == 1.
DiffusionState reverse_step(const NoiseSchedule& sched, const DiffusionState& state, const Vector& posterior_score,
                            Rng& rng);

}  // namespace saiplab
