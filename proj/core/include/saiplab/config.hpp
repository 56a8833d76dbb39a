#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "saiplab/guidance.hpp"
#include "saiplab/saip.hpp"
#include "saiplab/toml.hpp"

namespace saiplab {

enum class TaskKind { denoise, deblur, inpaint_random, inpaint_box, synthetic_gmm };

const char* to_string(TaskKind k);
TaskKind task_kind_from_string(const std::string& s);

/// Explicit mixture description (synthetic_gmm task): weights, means and
/// covariance matrices as nested arrays, plus the dense operator rows.
struct GmmSpec {
  std::vector<double> weights;
  std::vector<std::vector<double>> means;
  std::vector<std::vector<std::vector<double>>> covs;
  std::vector<std::vector<double>> operator_rows;
  double noise_std = 0.3;
};

struct TaskSpec {
  TaskKind kind = TaskKind::denoise;
  // Image tasks.
  int image_size = 16;
  double noise_std = 0.05;       // sigma of the measurement noise
  int kernel_size = 3;           // deblur
  double missing_fraction = 0.9; // inpaint_random
  std::array<int, 4> box = {4, 4, 8, 8};  // inpaint_box: top, left, height, width
  int prior_components = 3;
  double prior_pixel_std = 0.1;
  // synthetic_gmm task.
  std::optional<GmmSpec> gmm;
};

struct SamplerParams {
  int steps = 100;
  double beta_start = 1e-3;
  double beta_end = 0.2;
  int chains = 1;
  int threads = 1;
};

struct IoSpec {
  std::string output_dir;
  std::string input_image;  // optional PGM ground truth override
};

struct RunConfig {
  std::uint64_t seed = 0;
  TaskSpec task;
  SamplerParams sampler;
  GuidanceMethod guidance;
  SaipConfig saip;
  IoSpec io;
  std::vector<double> sweep_omegas;
  int sweep_chains = 400;
  int sweep_reference_samples = 2000;

  void validate() const;
};

RunConfig parse_run_config(const TomlTable& root);
RunConfig parse_run_config_text(const std::string& text);
RunConfig load_run_config(const std::string& path);
TomlTable to_toml(const RunConfig& cfg);

}  // namespace saiplab
