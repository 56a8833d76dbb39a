#include "saiplab/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "saiplab/errors.hpp"

namespace saiplab {

const char* to_string(TaskKind k) {
  switch (k) {
    case TaskKind::denoise: return "denoise";
    case TaskKind::deblur: return "deblur";
    case TaskKind::inpaint_random: return "inpaint_random";
    case TaskKind::inpaint_box: return "inpaint_box";
    case TaskKind::synthetic_gmm: return "synthetic_gmm";
  }
  return "?";
}

TaskKind task_kind_from_string(const std::string& s) {
  if (s == "denoise") return TaskKind::denoise;
  if (s == "deblur") return TaskKind::deblur;
  if (s == "inpaint_random") return TaskKind::inpaint_random;
  if (s == "inpaint_box") return TaskKind::inpaint_box;
  if (s == "synthetic_gmm") return TaskKind::synthetic_gmm;
  throw ConfigError("unknown task kind '" + s + "'");
}

namespace {

std::vector<double> to_double_vec(const TomlArray& arr, const char* what) {
  std::vector<double> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_int() && !v.is_double()) throw ConfigError(std::string(what) + ": expected numbers");
    out.push_back(v.as_double());
  }
  return out;
}

std::vector<std::vector<double>> to_matrix(const TomlArray& arr, const char* what) {
  std::vector<std::vector<double>> out;
  out.reserve(arr.size());
  for (const auto& row : arr) out.push_back(to_double_vec(row.as_array(), what));
  return out;
}

GmmSpec parse_gmm_spec(const TomlTable& t) {
  GmmSpec spec;
  spec.weights = to_double_vec(t.at("weights").as_array(), "task.gmm.weights");
  spec.means = to_matrix(t.at("means").as_array(), "task.gmm.means");
  for (const auto& cov : t.at("covs").as_array())
    spec.covs.push_back(to_matrix(cov.as_array(), "task.gmm.covs"));
  spec.operator_rows = to_matrix(t.at("operator_rows").as_array(), "task.gmm.operator_rows");
  spec.noise_std = t.get_double("noise_std", spec.noise_std);
  if (spec.weights.empty() || spec.weights.size() != spec.means.size() || spec.weights.size() != spec.covs.size())
    throw ConfigError("task.gmm: weights/means/covs must have matching nonzero lengths");
  return spec;
}

TomlValue from_double_vec(const std::vector<double>& v) {
  TomlArray arr;
  arr.reserve(v.size());
  for (double x : v) arr.emplace_back(TomlValue::Storage(x));
  return TomlValue(std::move(arr));
}

TomlValue from_matrix(const std::vector<std::vector<double>>& m) {
  TomlArray arr;
  arr.reserve(m.size());
  for (const auto& row : m) arr.push_back(from_double_vec(row));
  return TomlValue(std::move(arr));
}

}  // namespace

void RunConfig::validate() const {
  if (sampler.steps < 1) throw ConfigError("sampler.steps must be >= 1");
  if (sampler.chains < 1) throw ConfigError("sampler.chains must be >= 1");
  if (sampler.threads < 1) throw ConfigError("sampler.threads must be >= 1");
  if (!(sampler.beta_start > 0.0) || !(sampler.beta_start <= sampler.beta_end) || !(sampler.beta_end < 1.0))
    throw ConfigError("sampler: need 0 < beta_start <= beta_end < 1");
  if (task.kind == TaskKind::synthetic_gmm) {
    if (!task.gmm) throw ConfigError("task.gmm table required for synthetic_gmm");
  } else {
    if (task.image_size < 8) throw ConfigError("task.image_size must be >= 8");
    if (task.noise_std < 0.0) throw ConfigError("task.noise_std must be >= 0");
    if (task.prior_components < 1) throw ConfigError("task.prior_components must be >= 1");
    if (!(task.prior_pixel_std > 0.0)) throw ConfigError("task.prior_pixel_std must be > 0");
    if (task.kind == TaskKind::deblur && (task.kernel_size % 2 == 0 || task.kernel_size < 1))
      throw ConfigError("task.kernel_size must be odd and positive");
    if (task.kind == TaskKind::inpaint_random &&
        (task.missing_fraction < 0.0 || task.missing_fraction > 1.0))
      throw ConfigError("task.missing_fraction must be in [0, 1]");
  }
  try {
    guidance.validate();
    saip.validate();
  } catch (const ContractViolation& e) {
    throw ConfigError(e.what());
  }
}

RunConfig parse_run_config(const TomlTable& root) {
  RunConfig cfg;
  cfg.seed = static_cast<std::uint64_t>(root.get_int("seed", 0));

  const TomlTable& task = root.table("task");
  cfg.task.kind = task_kind_from_string(task.at("kind").as_string());
  cfg.task.image_size = static_cast<int>(task.get_int("image_size", cfg.task.image_size));
  cfg.task.noise_std = task.get_double("noise_std", cfg.task.kind == TaskKind::denoise ? 0.5 : 0.05);
  cfg.task.kernel_size = static_cast<int>(task.get_int("kernel_size", cfg.task.kernel_size));
  cfg.task.missing_fraction = task.get_double("missing_fraction", cfg.task.missing_fraction);
  if (task.has("box")) {
    const auto box = to_double_vec(task.at("box").as_array(), "task.box");
    if (box.size() != 4) throw ConfigError("task.box must have 4 entries: top, left, height, width");
    for (int i = 0; i < 4; ++i) cfg.task.box[i] = static_cast<int>(box[i]);
  } else {
    const int quarter = cfg.task.image_size / 4;
    cfg.task.box = {quarter, quarter, cfg.task.image_size / 2, cfg.task.image_size / 2};
  }
  cfg.task.prior_components = static_cast<int>(task.get_int("prior_components", cfg.task.prior_components));
  cfg.task.prior_pixel_std = task.get_double("prior_pixel_std", cfg.task.prior_pixel_std);
  if (task.has_table("gmm")) cfg.task.gmm = parse_gmm_spec(task.table("gmm"));

  if (root.has_table("sampler")) {
    const TomlTable& s = root.table("sampler");
    cfg.sampler.steps = static_cast<int>(s.get_int("steps", cfg.sampler.steps));
    cfg.sampler.beta_start = s.get_double("beta_start", cfg.sampler.beta_start);
    cfg.sampler.beta_end = s.get_double("beta_end", cfg.sampler.beta_end);
    cfg.sampler.chains = static_cast<int>(s.get_int("chains", cfg.sampler.chains));
    cfg.sampler.threads = static_cast<int>(s.get_int("threads", cfg.sampler.threads));
  }

  if (root.has_table("guidance")) {
    const TomlTable& g = root.table("guidance");
    cfg.guidance.kind = guidance_kind_from_string(g.get_string("method", "dps"));
    cfg.guidance.scale_param = g.get_double("scale", 1.0);
    cfg.guidance.pigdm_r2_mode = pigdm_r2_from_string(g.get_string("pigdm_r2", "heuristic"));
    cfg.guidance.dps_constant_scale = g.get_bool("dps_constant_scale", false);
  }

  if (root.has_table("saip")) {
    const TomlTable& s = root.table("saip");
    cfg.saip.enabled = s.get_bool("enabled", false);
    cfg.saip.omega = s.get_double("omega", cfg.guidance.scale_param);
    cfg.saip.variant = saip_variant_from_string(s.get_string("variant", "posterior-projection"));
    if (s.has("s_clamp")) {
      const auto clamp = to_double_vec(s.at("s_clamp").as_array(), "saip.s_clamp");
      if (clamp.size() != 2) throw ConfigError("saip.s_clamp must have 2 entries: lo, hi");
      cfg.saip.s_clamp = {clamp[0], clamp[1]};
    }
  } else {
    cfg.saip.omega = cfg.guidance.scale_param;
  }

  if (root.has_table("io")) {
    const TomlTable& io = root.table("io");
    cfg.io.output_dir = io.get_string("output_dir", "");
    cfg.io.input_image = io.get_string("input_image", "");
  }

  if (root.has_table("sweep")) {
    const TomlTable& sw = root.table("sweep");
    if (sw.has("omegas")) cfg.sweep_omegas = to_double_vec(sw.at("omegas").as_array(), "sweep.omegas");
    cfg.sweep_chains = static_cast<int>(sw.get_int("chains", cfg.sweep_chains));
    cfg.sweep_reference_samples =
        static_cast<int>(sw.get_int("reference_samples", cfg.sweep_reference_samples));
  }

  cfg.validate();
  return cfg;
}

RunConfig parse_run_config_text(const std::string& text) { return parse_run_config(parse_toml(text)); }

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config_text(ss.str());
}

TomlTable to_toml(const RunConfig& cfg) {
  TomlTable root;
  root.values.emplace("seed", TomlValue(TomlValue::Storage(static_cast<std::int64_t>(cfg.seed))));

  TomlTable task;
  task.values.emplace("kind", TomlValue(TomlValue::Storage(std::string(to_string(cfg.task.kind)))));
  if (cfg.task.kind == TaskKind::synthetic_gmm) {
    const GmmSpec& g = *cfg.task.gmm;
    TomlTable gmm;
    gmm.values.emplace("weights", from_double_vec(g.weights));
    gmm.values.emplace("means", from_matrix(g.means));
    TomlArray covs;
    for (const auto& c : g.covs) covs.push_back(from_matrix(c));
    gmm.values.emplace("covs", TomlValue(TomlValue::Storage(std::move(covs))));
    gmm.values.emplace("operator_rows", from_matrix(g.operator_rows));
    gmm.values.emplace("noise_std", TomlValue(TomlValue::Storage(g.noise_std)));
    task.tables.emplace("gmm", std::move(gmm));
  } else {
    task.values.emplace("image_size", TomlValue(TomlValue::Storage(std::int64_t(cfg.task.image_size))));
    task.values.emplace("noise_std", TomlValue(TomlValue::Storage(cfg.task.noise_std)));
    task.values.emplace("prior_components", TomlValue(TomlValue::Storage(std::int64_t(cfg.task.prior_components))));
    task.values.emplace("prior_pixel_std", TomlValue(TomlValue::Storage(cfg.task.prior_pixel_std)));
    if (cfg.task.kind == TaskKind::deblur)
      task.values.emplace("kernel_size", TomlValue(TomlValue::Storage(std::int64_t(cfg.task.kernel_size))));
    if (cfg.task.kind == TaskKind::inpaint_random)
      task.values.emplace("missing_fraction", TomlValue(TomlValue::Storage(cfg.task.missing_fraction)));
    if (cfg.task.kind == TaskKind::inpaint_box) {
      TomlArray box;
      for (int v : cfg.task.box) box.emplace_back(TomlValue::Storage(std::int64_t(v)));
      task.values.emplace("box", TomlValue(TomlValue::Storage(std::move(box))));
    }
  }
  root.tables.emplace("task", std::move(task));

  TomlTable sampler;
  sampler.values.emplace("steps", TomlValue(TomlValue::Storage(std::int64_t(cfg.sampler.steps))));
  sampler.values.emplace("beta_start", TomlValue(TomlValue::Storage(cfg.sampler.beta_start)));
  sampler.values.emplace("beta_end", TomlValue(TomlValue::Storage(cfg.sampler.beta_end)));
  sampler.values.emplace("chains", TomlValue(TomlValue::Storage(std::int64_t(cfg.sampler.chains))));
  sampler.values.emplace("threads", TomlValue(TomlValue::Storage(std::int64_t(cfg.sampler.threads))));
  root.tables.emplace("sampler", std::move(sampler));

  TomlTable guidance;
  guidance.values.emplace("method", TomlValue(TomlValue::Storage(std::string(to_string(cfg.guidance.kind)))));
  guidance.values.emplace("scale", TomlValue(TomlValue::Storage(cfg.guidance.scale_param)));
  guidance.values.emplace("pigdm_r2",
                          TomlValue(TomlValue::Storage(std::string(to_string(cfg.guidance.pigdm_r2_mode)))));
  guidance.values.emplace("dps_constant_scale", TomlValue(TomlValue::Storage(cfg.guidance.dps_constant_scale)));
  root.tables.emplace("guidance", std::move(guidance));

  TomlTable saip;
  saip.values.emplace("enabled", TomlValue(TomlValue::Storage(cfg.saip.enabled)));
  saip.values.emplace("omega", TomlValue(TomlValue::Storage(cfg.saip.omega)));
  saip.values.emplace("variant", TomlValue(TomlValue::Storage(std::string(to_string(cfg.saip.variant)))));
  if (cfg.saip.s_clamp) {
    TomlArray clamp;
    clamp.emplace_back(TomlValue::Storage(cfg.saip.s_clamp->first));
    clamp.emplace_back(TomlValue::Storage(cfg.saip.s_clamp->second));
    saip.values.emplace("s_clamp", TomlValue(TomlValue::Storage(std::move(clamp))));
  }
  root.tables.emplace("saip", std::move(saip));

  TomlTable io;
  io.values.emplace("output_dir", TomlValue(TomlValue::Storage(cfg.io.output_dir)));
  if (!cfg.io.input_image.empty())
    io.values.emplace("input_image", TomlValue(TomlValue::Storage(cfg.io.input_image)));
  root.tables.emplace("io", std::move(io));

  if (!cfg.sweep_omegas.empty()) {
    TomlTable sweep;
    sweep.values.emplace("omegas", from_double_vec(cfg.sweep_omegas));
    sweep.values.emplace("chains", TomlValue(TomlValue::Storage(std::int64_t(cfg.sweep_chains))));
    sweep.values.emplace("reference_samples",
                         TomlValue(TomlValue::Storage(std::int64_t(cfg.sweep_reference_samples))));
    root.tables.emplace("sweep", std::move(sweep));
  }
  return root;
}

}  // namespace saiplab
