#pragma once

#include <optional>
#include <vector>

#include "saiplab/linalg.hpp"
#include "saiplab/rng.hpp"
#include "saiplab/signal.hpp"

namespace saiplab {

struct MetricReport {
  double psnr_db = 0.0;
  double ssim = 0.0;
  std::optional<double> sw_distance;
};

/// Peak signal-to-noise ratio in dB; identical inputs (zero MSE) return the
/// 99.0 dB sentinel cap.
double psnr(const Signal& reference, const Signal& estimate, double peak = 1.0);

/// Mean structural similarity over non-overlapping 8x8 windows with
/// C1 = (0.01 peak)^2, C2 = (0.03 peak)^2. This deliberately differs from
/// the sliding-Gaussian-window reference implementation; all comparisons in
/// this project are internal-relative. Images must be at least 8x8.
double ssim(const Signal& reference, const Signal& estimate, double peak = 1.0);

/// Exact 1-Wasserstein distance between two 1-D empirical distributions
/// (quantile-function integral; sample counts may differ).
double wasserstein1_1d(std::vector<double> a, std::vector<double> b);

/// Monte-Carlo sliced Wasserstein-1 distance: average over random unit
/// projections of the 1-D distance between the projected samples.
double sliced_wasserstein(const std::vector<Vector>& a, const std::vector<Vector>& b, int projections, Rng& rng);

}  // namespace saiplab
