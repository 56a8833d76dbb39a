#include "saiplab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "saiplab/errors.hpp"
#include "saiplab/metrics.hpp"
#include "saiplab/pgm.hpp"
#include "saiplab/sampler.hpp"
#include "saiplab/tasks.hpp"
#include "saiplab/verify.hpp"

#ifndef SAIPLAB_BUILD_ID
#define SAIPLAB_BUILD_ID "unknown"
#endif

namespace saiplab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v, const char* spec = "%.17g") {
  char buf[48];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string resolve_out_dir(const RunConfig& cfg, const HarnessOverrides& ov) {
  if (ov.out_dir && !ov.out_dir->empty()) return *ov.out_dir;
  if (!cfg.io.output_dir.empty()) return cfg.io.output_dir;
  if (const char* env = std::getenv(kOutDirEnvVar); env && *env) return env;
  throw ConfigError("no output directory: set io.output_dir, --out, or SAIP_LAB_OUT");
}

RunConfig load_with_overrides(const std::string& path, const HarnessOverrides& ov) {
  RunConfig cfg = load_run_config(path);
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.threads) cfg.sampler.threads = *ov.threads;
  return cfg;
}

struct MetricsRow {
  std::string run_id;
  std::string task;
  std::string method;
  bool saip_enabled = false;
  std::string saip_variant;
  double omega = 0.0;
  std::uint64_t seed = 0;
  std::optional<double> psnr_db;
  std::optional<double> ssim_v;
  std::optional<double> sw_distance;
  double wall_time_s = 0.0;
  std::uint64_t extra_memory_bytes = 0;
};

std::string cell(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

void write_metrics_csv(const fs::path& path, const std::vector<MetricsRow>& rows) {
  std::ofstream out(path);
  out << "run_id,task,method,saip_enabled,saip_variant,omega,seed,psnr_db,ssim,sw_distance,"
         "wall_time_s,extra_memory_bytes\n";
  for (const auto& r : rows) {
    out << r.run_id << ',' << r.task << ',' << r.method << ',' << (r.saip_enabled ? "true" : "false") << ','
        << r.saip_variant << ',' << fmt(r.omega) << ',' << r.seed << ',' << cell(r.psnr_db) << ','
        << cell(r.ssim_v) << ',' << cell(r.sw_distance) << ',' << fmt(r.wall_time_s) << ','
        << r.extra_memory_bytes << '\n';
  }
}

json row_to_json(const MetricsRow& r) {
  json j{{"run_id", r.run_id},
         {"task", r.task},
         {"method", r.method},
         {"saip_enabled", r.saip_enabled},
         {"saip_variant", r.saip_variant},
         {"omega", r.omega},
         {"seed", r.seed},
         {"wall_time_s", r.wall_time_s},
         {"extra_memory_bytes", r.extra_memory_bytes}};
  if (r.psnr_db) j["psnr_db"] = *r.psnr_db;
  if (r.ssim_v) j["ssim"] = *r.ssim_v;
  if (r.sw_distance) j["sw_distance"] = *r.sw_distance;
  return j;
}

Vector chain_mean(const std::vector<Vector>& samples) {
  Vector mean = Vector::Zero(samples.front().size());
  for (const auto& s : samples) mean += s;
  return mean / static_cast<double>(samples.size());
}

void write_samples_csv(const fs::path& path, const std::vector<Vector>& samples) {
  std::ofstream out(path);
  for (const auto& s : samples) {
    for (int i = 0; i < s.size(); ++i) out << (i ? "," : "") << fmt(s[i]);
    out << '\n';
  }
}

}  // namespace

TraceDeciles trace_deciles(const std::vector<double>& s_values) {
  if (s_values.empty()) throw ContractViolation("trace_deciles: empty trace");
  const size_t n = s_values.size();
  const size_t decile = std::max<size_t>(1, (n + 9) / 10);
  TraceDeciles d;
  for (size_t i = 0; i < decile; ++i) d.first += std::abs(s_values[i] - 1.0);
  for (size_t i = n - decile; i < n; ++i) d.last += std::abs(s_values[i] - 1.0);
  d.first /= decile;
  d.last /= decile;
  return d;
}

int cmd_run(const std::string& config_path, const HarnessOverrides& overrides, std::ostream& out,
            std::ostream& err) {
  RunConfig cfg;
  fs::path dir;
  try {
    cfg = load_with_overrides(config_path, overrides);
    dir = resolve_out_dir(cfg, overrides);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  }
  try {
    fs::create_directories(dir);
    std::vector<std::string> files;

    TaskInstance task = [&] {
      if (cfg.task.kind != TaskKind::synthetic_gmm && !cfg.io.input_image.empty())
        return build_task_with_ground_truth(cfg.task, cfg.seed, read_pgm(cfg.io.input_image));
      return build_task(cfg.task, cfg.seed);
    }();

    SamplerConfig sampler;
    sampler.schedule = NoiseSchedule::linear(cfg.sampler.steps, cfg.sampler.beta_start, cfg.sampler.beta_end);
    sampler.guidance = cfg.guidance;
    sampler.chains = cfg.sampler.chains;
    sampler.threads = cfg.sampler.threads;
    sampler.seed = cfg.seed;

    const bool image_task = cfg.task.kind != TaskKind::synthetic_gmm;
    if (image_task) {
      write_pgm((dir / "ground_truth.pgm").string(), task.ground_truth_signal());
      files.push_back("ground_truth.pgm");
      // Masked measurements are visualized through the adjoint (kept pixels
      // back in place, missing ones at zero).
      Vector vis = task.y.size() == task.ground_truth.size() ? task.y : task.model.op->adjoint(task.y);
      write_pgm((dir / "measurement.pgm").string(), Signal::image(vis, task.height, task.width));
      files.push_back("measurement.pgm");
    }

    std::optional<Gmm> posterior;
    std::vector<Vector> reference;
    if (cfg.task.kind == TaskKind::synthetic_gmm && task.model.noise_std > 0.0) {
      posterior = exact_posterior(task.prior, task.model, task.y);
      Rng ref_rng(20250815);
      reference = posterior->sample_many(ref_rng, cfg.sweep_reference_samples);
    }

    std::vector<MetricsRow> rows;
    std::vector<bool> variants{false};
    if (cfg.saip.enabled) variants.push_back(true);
    for (bool adaptive : variants) {
      SamplerConfig vc = sampler;
      vc.saip = cfg.saip;
      vc.saip.enabled = adaptive;
      const RunResult run = sample_posterior(vc, task.prior, task.model, task.y);
      const std::string tag = adaptive ? "saip" : "baseline";
      for (const auto& chain : run.chains) {
        if (!chain.ok) throw Error("chain failed (" + tag + "): " + chain.error);
      }
      const std::vector<Vector> samples = run.samples();

      for (size_t c = 0; c < run.chains.size(); ++c) {
        char name[64];
        std::snprintf(name, sizeof(name), "trace_%s_chain%03zu.csv", tag.c_str(), c);
        std::ofstream tf(dir / name);
        write_trace_csv(tf, run.chains[c].trace);
        files.push_back(name);
      }

      MetricsRow row;
      row.run_id = std::string(to_string(cfg.task.kind)) + "-" + to_string(cfg.guidance.kind) + "-" + tag +
                   "-seed" + std::to_string(cfg.seed);
      row.task = to_string(cfg.task.kind);
      row.method = to_string(cfg.guidance.kind);
      row.saip_enabled = adaptive;
      row.saip_variant = to_string(cfg.saip.variant);
      row.omega = cfg.guidance.scale_param;
      row.seed = cfg.seed;
      row.wall_time_s = run.wall_time_seconds;
      row.extra_memory_bytes = run.peak_extra_memory_bytes;

      const Vector recon = chain_mean(samples);
      if (image_task) {
        const Signal recon_img = Signal::image(recon, task.height, task.width);
        const std::string name = "reconstruction_" + tag + ".pgm";
        write_pgm((dir / name).string(), recon_img);
        files.push_back(name);
        row.psnr_db = psnr(task.ground_truth_signal(), recon_img);
        row.ssim_v = ssim(task.ground_truth_signal(), recon_img);
      } else {
        const std::string name = "samples_" + tag + ".csv";
        write_samples_csv(dir / name, samples);
        files.push_back(name);
        if (posterior) {
          Rng proj_rng(20250815);
          row.sw_distance = sliced_wasserstein(samples, reference, 128, proj_rng);
        }
      }
      rows.push_back(row);
    }

    write_metrics_csv(dir / "metrics.csv", rows);
    files.push_back("metrics.csv");

    json manifest;
    manifest["resolved_config"] = serialize_toml(to_toml(cfg));
    manifest["build"] = {{"version", SAIPLAB_BUILD_ID}, {"compiler", __VERSION__}};
    manifest["metrics"] = json::array();
    for (const auto& r : rows) manifest["metrics"].push_back(row_to_json(r));
    files.push_back("manifest.json");
    std::sort(files.begin(), files.end());
    manifest["files"] = files;
    std::ofstream mf(dir / "manifest.json");
    mf << manifest.dump(2) << '\n';

    out << "wrote " << files.size() << " files to " << dir.string() << '\n';
    for (const auto& r : rows)
      out << "  " << r.run_id << (r.psnr_db ? "  psnr=" + fmt(*r.psnr_db, "%.2f") + " dB" : "")
          << (r.ssim_v ? "  ssim=" + fmt(*r.ssim_v, "%.4f") : "")
          << (r.sw_distance ? "  sw=" + fmt(*r.sw_distance, "%.4f") : "") << '\n';
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "run failed: " << e.what() << '\n';
    return kExitRuntime;
  }
}

int cmd_verify(std::ostream& out, std::ostream& err) {
  try {
    const std::vector<CheckResult> checks = run_verification();
    size_t name_width = 0;
    for (const auto& c : checks) name_width = std::max(name_width, c.name.size());
    bool all_pass = true;
    out << "oracle verification (" << checks.size() << " checks)\n";
    for (const auto& c : checks) {
      all_pass = all_pass && c.pass;
      out << "  " << (c.pass ? "[PASS] " : "[FAIL] ") << c.name
          << std::string(name_width - c.name.size() + 2, ' ') << "observed " << fmt(c.observed, "%.3e")
          << "  tolerance " << fmt(c.tolerance, "%.3e") << "  (" << c.detail << ")\n";
    }
    out << (all_pass ? "all checks passed\n" : "verification FAILED\n");
    return all_pass ? kExitOk : kExitRuntime;
  } catch (const std::exception& e) {
    err << "verify failed to run: " << e.what() << '\n';
    return kExitRuntime;
  }
}

int cmd_sweep(const std::string& config_path, const std::vector<double>& omegas_override,
              const HarnessOverrides& overrides, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  fs::path dir;
  std::vector<double> omegas;
  try {
    cfg = load_with_overrides(config_path, overrides);
    dir = resolve_out_dir(cfg, overrides);
    if (cfg.task.kind != TaskKind::synthetic_gmm)
      throw ConfigError("sweep requires a synthetic_gmm task (exact posterior needed)");
    omegas = omegas_override.empty() ? cfg.sweep_omegas : omegas_override;
    if (omegas.empty()) throw ConfigError("no omegas: pass --omegas or set sweep.omegas");
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  }
  try {
    fs::create_directories(dir);
    TaskInstance task = build_task(cfg.task, cfg.seed);
    SamplerConfig sampler;
    sampler.schedule = NoiseSchedule::linear(cfg.sampler.steps, cfg.sampler.beta_start, cfg.sampler.beta_end);
    sampler.guidance = cfg.guidance;
    sampler.saip = cfg.saip;
    sampler.chains = cfg.sweep_chains;
    sampler.threads = cfg.sampler.threads;
    sampler.seed = cfg.seed;
    const auto rows =
        sweep_scale(sampler, task.prior, task.model, task.y, omegas, cfg.sweep_reference_samples);
    std::ofstream sf(dir / "sweep.csv");
    sf << "omega,variant,sw_distance,wall_time_s\n";
    for (const auto& r : rows)
      sf << fmt(r.omega) << ',' << r.variant << ',' << fmt(r.sw_distance) << ',' << fmt(r.wall_time_s) << '\n';
    out << "wrote " << (dir / "sweep.csv").string() << " (" << rows.size() << " rows)\n";
    for (const auto& r : rows)
      out << "  omega=" << fmt(r.omega, "%g") << "  " << r.variant << "  sw=" << fmt(r.sw_distance, "%.4f")
          << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    err << "sweep failed: " << e.what() << '\n';
    return kExitRuntime;
  }
}

int cmd_trace_plot(const std::string& trace_csv_path, const HarnessOverrides& overrides, std::ostream& out,
                   std::ostream& err) {
  SaipTrace trace;
  try {
    std::ifstream in(trace_csv_path);
    if (!in) throw ConfigError("cannot open trace file '" + trace_csv_path + "'");
    trace = read_trace_csv(in);
    if (trace.empty()) throw ConfigError("trace file has no rows");
  } catch (const ConfigError& e) {
    err << "trace error: " << e.what() << '\n';
    return kExitUsage;
  }
  try {
    std::vector<double> s;
    s.reserve(trace.size());
    for (const auto& r : trace) s.push_back(r.s);
    const auto [mn_it, mx_it] = std::minmax_element(s.begin(), s.end());
    const double mn = *mn_it, mx = *mx_it;

    static const char* kLevels = " .:-=+*#%@";
    const int width = static_cast<int>(std::min<size_t>(s.size(), 64));
    std::string spark;
    for (int i = 0; i < width; ++i) {
      const size_t idx = i * s.size() / width;
      const double frac = mx > mn ? (s[idx] - mn) / (mx - mn) : 0.5;
      spark += kLevels[static_cast<int>(frac * 9.0)];
    }

    const TraceDeciles d = trace_deciles(s);
    out << "trace: " << trace.size() << " steps, t = " << trace.front().t << " .. " << trace.back().t << '\n';
    out << "s range [" << fmt(mn, "%.4f") << ", " << fmt(mx, "%.4f") << "]\n";
    out << "s |" << spark << "|\n";
    out << "mean|s-1| first decile: " << fmt(d.first, "%.6f") << '\n';
    out << "mean|s-1| last decile:  " << fmt(d.last, "%.6f") << '\n';

    fs::path data_path;
    if (overrides.out_dir && !overrides.out_dir->empty()) {
      fs::create_directories(*overrides.out_dir);
      data_path = fs::path(*overrides.out_dir) / (fs::path(trace_csv_path).stem().string() + "_plot.dat");
    } else {
      data_path = fs::path(trace_csv_path).replace_extension(".dat");
    }
    std::ofstream df(data_path);
    df << "# t s\n";
    for (const auto& r : trace) df << r.t << ' ' << fmt(r.s) << '\n';
    out << "gnuplot data written to " << data_path.string() << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    err << "trace-plot failed: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace saiplab
