#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "saiplab/gmm.hpp"
#include "saiplab/guidance.hpp"
#include "saiplab/saip.hpp"
#include "saiplab/schedule.hpp"

namespace saiplab {

struct SamplerConfig {
  NoiseSchedule schedule = desk_schedule();
  GuidanceMethod guidance;
  SaipConfig saip;
  int chains = 1;
  std::uint64_t seed = 0;
  int threads = 1;

  void validate() const;
};

struct ChainResult {
  Vector sample;
  SaipTrace trace;
  bool ok = true;
  std::string error;  // set when the chain aborted
};

struct RunResult {
  std::vector<ChainResult> chains;
  double wall_time_seconds = 0.0;
  std::uint64_t peak_extra_memory_bytes = 0;  // best effort (VmHWM delta)

  /// Terminal samples of the chains that completed.
  std::vector<Vector> samples() const;
};

/// Full guided reverse loop. Each chain: x_T ~ N(0, I); for t = T..1 combine
/// the prior score with the guidance estimate (adaptively rescaled when the
/// adaptive module is enabled) and take one ancestral step, recording one
/// trace row per step. Chains are independent; per-chain streams derive from
/// (seed, chain_index) so results are identical for any thread count.
/// A failing chain reports its error and leaves the others untouched.
RunResult sample_posterior(const SamplerConfig& cfg, const Gmm& prior, const MeasurementModel& model,
                           const Vector& y);

struct SweepRow {
  double omega = 0.0;
  std::string variant;  // "baseline" or "saip"
  double sw_distance = 0.0;
  double wall_time_s = 0.0;
};

/// Runs baseline and adaptive variants at each guidance scale and reports
/// the sliced-Wasserstein distance of the terminal samples to a reference
/// sample of the exact posterior (requires sigma > 0 and a materializable
/// operator). Two rows per omega.
std::vector<SweepRow> sweep_scale(const SamplerConfig& base, const Gmm& prior, const MeasurementModel& model,
                                  const Vector& y, const std::vector<double>& omegas, int reference_samples = 2000,
                                  int projections = 128, std::uint64_t metric_seed = 20250815);

}  // namespace saiplab
