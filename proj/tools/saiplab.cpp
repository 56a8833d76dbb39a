// saiplab: config-driven runner for guided diffusion sampling on linear
// inverse problems, with built-in oracle verification.
//
//   saiplab run        --config cfg.toml [--out DIR] [--seed N] [--threads N]
//   saiplab verify
//   saiplab sweep      --config cfg.toml [--omegas 0.2,0.5,1] [--out DIR]
//   saiplab trace-plot trace.csv [--out DIR]

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "saiplab/harness.hpp"

namespace {

std::vector<double> parse_omega_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(std::stod(tok));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"guided diffusion sampling lab for linear inverse problems"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string omegas_csv;
  std::string trace_path;
  std::uint64_t seed = 0;
  int threads = 0;
  bool seed_set = false, threads_set = false;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* c = cmd->add_option("--config", config_path, "config file (TOML)");
    if (needs_config) c->required();
    cmd->add_option("--out", out_dir, "output directory (overrides io.output_dir / SAIP_LAB_OUT)");
    cmd->add_option("--seed", seed, "seed override")->each([&](const std::string&) { seed_set = true; });
    cmd->add_option("--threads", threads, "worker threads for chains")->each([&](const std::string&) {
      threads_set = true;
    });
  };

  CLI::App* run = app.add_subcommand("run", "run the configured task (baseline + adaptive variant)");
  add_common(run, true);

  CLI::App* verify = app.add_subcommand("verify", "run the oracle verification suite");
  (void)verify;

  CLI::App* sweep = app.add_subcommand("sweep", "guidance-scale sweep against the exact posterior");
  add_common(sweep, true);
  sweep->add_option("--omegas", omegas_csv, "comma-separated scales (overrides sweep.omegas)");

  CLI::App* trace = app.add_subcommand("trace-plot", "summarize a trace CSV");
  trace->add_option("trace_csv", trace_path, "trace CSV file")->required();
  trace->add_option("--out", out_dir, "directory for the plot data file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    // Help/version exit cleanly; anything else is a usage error.
    return code == 0 ? saiplab::kExitOk : saiplab::kExitUsage;
  }

  saiplab::HarnessOverrides ov;
  if (!out_dir.empty()) ov.out_dir = out_dir;
  if (seed_set) ov.seed = seed;
  if (threads_set) ov.threads = threads;

  try {
    if (run->parsed()) return saiplab::cmd_run(config_path, ov, std::cout, std::cerr);
    if (verify->parsed()) return saiplab::cmd_verify(std::cout, std::cerr);
    if (sweep->parsed())
      return saiplab::cmd_sweep(config_path, parse_omega_list(omegas_csv), ov, std::cout, std::cerr);
    if (trace->parsed()) return saiplab::cmd_trace_plot(trace_path, ov, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return saiplab::kExitRuntime;
  }
  return saiplab::kExitUsage;
}
