#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "saiplab/config.hpp"

namespace saiplab {

/// Command-line overrides that take precedence over the config file.
struct HarnessOverrides {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

/// Exit codes shared by all subcommands (stable contract):
/// 0 success, 1 runtime failure, 2 usage/config error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Runs the configured task for the baseline and (when enabled) the
/// adaptive variant under the same seed; writes images (PGM), per-chain
/// trace CSVs, metrics.csv and a JSON manifest into the output directory.
int cmd_run(const std::string& config_path, const HarnessOverrides& overrides, std::ostream& out,
            std::ostream& err);

/// Runs the oracle verification suite and prints one row per check.
int cmd_verify(std::ostream& out, std::ostream& err);

/// Guidance-scale sweep on an exactly solvable task; writes sweep.csv with
/// columns omega,variant,sw_distance,wall_time_s.
int cmd_sweep(const std::string& config_path, const std::vector<double>& omegas_override,
              const HarnessOverrides& overrides, std::ostream& out, std::ostream& err);

/// Text summary (sparkline + first/last decile deviation of s) plus a
/// gnuplot-ready two-column data file derived from a trace CSV.
int cmd_trace_plot(const std::string& trace_csv_path, const HarnessOverrides& overrides, std::ostream& out,
                   std::ostream& err);

/// Decile summary used by the trace plot: mean |s - 1| over the first and
/// last 10% of rows (row order = execution order, t = T down to 1).
struct TraceDeciles {
  double first = 0.0;
  double last = 0.0;
};
TraceDeciles trace_deciles(const std::vector<double>& s_values);

/// Environment variable consulted for the output directory when neither
/// --out nor io.output_dir is set.
inline constexpr const char* kOutDirEnvVar = "SAIP_LAB_OUT";

}  // namespace saiplab
