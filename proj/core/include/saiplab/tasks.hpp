#pragma once

#include <cstdint>
#include <string>

#include "saiplab/config.hpp"
#include "saiplab/gmm.hpp"
#include "saiplab/operators.hpp"

namespace saiplab {

/// Fully instantiated inverse problem: the prior, the measurement process,
/// one ground-truth draw and its measurement. Everything derives
/// deterministically from (spec, seed).
struct TaskInstance {
  Gmm prior;
  MeasurementModel model;
  Vector ground_truth;
  Vector y;
  int height = 0;  // image shape; synthetic_gmm uses dim x 1
  int width = 1;

  Signal ground_truth_signal() const { return Signal::image(ground_truth, height, width); }
};

TaskInstance build_task(const TaskSpec& spec, std::uint64_t seed);

/// Optional override: use this image (values in [0, 1]) as the ground truth
/// instead of a prior draw; the measurement is regenerated from the seed.
TaskInstance build_task_with_ground_truth(const TaskSpec& spec, std::uint64_t seed, const Signal& ground_truth);

/// The fixed 2-D reference problem used by the verification and acceptance
/// suites: a 3-component mixture with weights (0.5, 0.3, 0.2), means
/// (-2,-2), (2,1), (0,3) and covariances 0.5 I; the operator observes the
/// first coordinate; sigma = 0.3. The measurement seed is fixed (and chosen
/// so the posterior stays multimodal); every derived number in the test
/// suites assumes this exact instance.
TaskInstance make_reference_toy();

/// Seeded piecewise-constant image in [0, 1] (random axis-aligned
/// rectangles over a flat background).
Vector piecewise_constant_image(int height, int width, Rng& rng);

/// Mixture over images: piecewise-constant component means with isotropic
/// per-pixel variance.
Gmm make_image_prior(int height, int width, int components, double pixel_std, std::uint64_t seed);

}  // namespace saiplab
