#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

#include <doctest.h>

#include <algorithm>

#include "saiplab/config.hpp"
#include "saiplab/errors.hpp"
#include "saiplab/harness.hpp"
#include "saiplab/pgm.hpp"
#include "saiplab/rng.hpp"
#include "saiplab/tasks.hpp"
#include "saiplab/toml.hpp"
#include "saiplab/verify.hpp"

using namespace saiplab;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("saiplab_test_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const fs::path& dir, const std::string& name, const std::string& body) {
  const fs::path p = dir / name;
  std::ofstream out(p);
  out << body;
  return p;
}

const char* kDenoiseConfig = R"(# small denoising smoke test
seed = 7

[task]
kind = "denoise"
image_size = 16
noise_std = 0.5
prior_components = 2
prior_pixel_std = 0.1

[sampler]
steps = 30
chains = 2

[guidance]
method = "dps"
scale = 0.5

[saip]
enabled = true
)";

// Strips the volatile timing/memory columns (the last two) of metrics.csv.
std::string stable_metrics(const fs::path& p) {
  std::ifstream in(p);
  std::string line, out;
  while (std::getline(in, line)) {
    size_t cut = line.rfind(',');
    cut = line.rfind(',', cut - 1);
    out += line.substr(0, cut) + "\n";
  }
  return out;
}

}  // namespace

TEST_CASE("toml: values, nested arrays, tables, comments") {
  const std::string text = R"(
# comment
seed = 42
ratio = 0.5
label = "hello \"world\""
flag = true

[a.b]
xs = [1, 2, 3]
grid = [[1.0, 0.0],
        [0.0, 1.0]]  # multi-line array
)";
  const TomlTable t = parse_toml(text);
  CHECK(t.at("seed").as_int() == 42);
  CHECK(t.at("ratio").as_double() == 0.5);
  CHECK(t.at("label").as_string() == "hello \"world\"");
  CHECK(t.at("flag").as_bool());
  const TomlTable& ab = t.table("a").table("b");
  CHECK(ab.at("xs").as_array().size() == 3);
  CHECK(ab.at("xs").as_array()[2].as_int() == 3);
  CHECK(ab.at("grid").as_array()[1].as_array()[1].as_double() == 1.0);
}

TEST_CASE("toml: errors carry line numbers") {
  try {
    parse_toml("a = 1\nb 2\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line == 2);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_toml("x = [1, 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_toml("x = \"unterminated\n"), ConfigError);
  CHECK_THROWS_AS(parse_toml("x = 1\nx = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_toml("x = zzz\n"), ConfigError);
}

TEST_CASE("toml: serialize-parse round trip is idempotent") {
  const TomlTable t = parse_toml(std::string(kDenoiseConfig));
  const std::string once = serialize_toml(t);
  const std::string twice = serialize_toml(parse_toml(once));
  CHECK(once == twice);
}

TEST_CASE("run config: parse, validation diagnostics, round trip") {
  const RunConfig cfg = parse_run_config_text(kDenoiseConfig);
  CHECK(cfg.seed == 7);
  CHECK(cfg.task.kind == TaskKind::denoise);
  CHECK(cfg.task.noise_std == 0.5);
  CHECK(cfg.sampler.steps == 30);
  CHECK(cfg.guidance.kind == GuidanceKind::dps);
  CHECK(cfg.saip.enabled);

  // Round trip through the canonical serializer.
  const RunConfig again = parse_run_config_text(serialize_toml(to_toml(cfg)));
  CHECK(serialize_toml(to_toml(again)) == serialize_toml(to_toml(cfg)));

  CHECK_THROWS_WITH_AS(parse_run_config_text("[task]\nkind = \"warp\"\n"),
                       doctest::Contains("unknown task kind"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_run_config_text("[task]\nkind = \"denoise\"\nimage_size = 4\n"),
                       doctest::Contains("image_size"), ConfigError);
  CHECK_THROWS_AS(parse_run_config_text("[task]\nkind = \"synthetic_gmm\"\n"), ConfigError);
}

TEST_CASE("pgm: write/read round trip is exact on the 8-bit grid") {
  const fs::path dir = fresh_dir("pgm");
  Rng rng(3);
  Vector v(12 * 10);
  for (int i = 0; i < v.size(); ++i) v[i] = rng.uniform01();
  // Snap to the 8-bit grid first so the round trip is bit-exact.
  for (int i = 0; i < v.size(); ++i) v[i] = std::round(v[i] * 255.0) / 255.0;
  const Signal img = Signal::image(v, 12, 10);
  write_pgm((dir / "t.pgm").string(), img);
  const Signal back = read_pgm((dir / "t.pgm").string());
  CHECK(back.height == 12);
  CHECK(back.width == 10);
  CHECK((back.data - img.data).cwiseAbs().maxCoeff() == 0.0);
  fs::remove_all(dir);
}

TEST_CASE("task builders are deterministic in the seed") {
  TaskSpec spec;
  spec.kind = TaskKind::inpaint_random;
  spec.image_size = 16;
  const TaskInstance a = build_task(spec, 5);
  const TaskInstance b = build_task(spec, 5);
  CHECK((a.y - b.y).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.ground_truth - b.ground_truth).cwiseAbs().maxCoeff() == 0.0);
  const TaskInstance c = build_task(spec, 6);
  CHECK((a.ground_truth - c.ground_truth).cwiseAbs().maxCoeff() != 0.0);
}

TEST_CASE("cmd_run: smoke, manifest inventory, deterministic rerun") {
  const fs::path dir = fresh_dir("run");
  const fs::path cfg = write_config(dir, "cfg.toml", kDenoiseConfig);
  const fs::path out1 = dir / "out1";
  const fs::path out2 = dir / "out2";
  std::ostringstream log, errs;

  HarnessOverrides ov1;
  ov1.out_dir = out1.string();
  REQUIRE(cmd_run(cfg.string(), ov1, log, errs) == kExitOk);
  CHECK(fs::exists(out1 / "ground_truth.pgm"));
  CHECK(fs::exists(out1 / "measurement.pgm"));
  CHECK(fs::exists(out1 / "reconstruction_baseline.pgm"));
  CHECK(fs::exists(out1 / "reconstruction_saip.pgm"));
  CHECK(fs::exists(out1 / "metrics.csv"));
  CHECK(fs::exists(out1 / "trace_baseline_chain000.csv"));
  CHECK(fs::exists(out1 / "trace_saip_chain001.csv"));

  // Two metric rows: baseline + adaptive variant.
  std::istringstream metrics(slurp(out1 / "metrics.csv"));
  std::string line;
  int rows = 0;
  std::getline(metrics, line);
  CHECK(line.rfind("run_id,task,method,saip_enabled,saip_variant,omega,seed,psnr_db,ssim,"
                   "sw_distance,wall_time_s,extra_memory_bytes",
                   0) == 0);
  while (std::getline(metrics, line)) ++rows;
  CHECK(rows == 2);

  // Manifest lists exactly the files present.
  const std::string manifest = slurp(out1 / "manifest.json");
  size_t listed = 0;
  for (const auto& entry : fs::directory_iterator(out1)) {
    const std::string name = entry.path().filename().string();
    CHECK(manifest.find('"' + name + '"') != std::string::npos);
    ++listed;
  }
  CHECK(listed > 0);

  HarnessOverrides ov2;
  ov2.out_dir = out2.string();
  REQUIRE(cmd_run(cfg.string(), ov2, log, errs) == kExitOk);
  // Deterministic apart from the measured wall-time/memory columns.
  CHECK(stable_metrics(out1 / "metrics.csv") == stable_metrics(out2 / "metrics.csv"));
  CHECK(slurp(out1 / "reconstruction_saip.pgm") == slurp(out2 / "reconstruction_saip.pgm"));
  CHECK(slurp(out1 / "trace_saip_chain000.csv") == slurp(out2 / "trace_saip_chain000.csv"));
  fs::remove_all(dir);
}

TEST_CASE("cmd_run: adaptive run with s clamped to 1 reproduces the baseline outputs") {
  const fs::path dir = fresh_dir("reduce");
  const std::string forced = std::string(kDenoiseConfig) + "s_clamp = [1.0, 1.0]\n";
  const fs::path cfg_a = write_config(dir, "a.toml", kDenoiseConfig);
  const fs::path cfg_b = write_config(dir, "b.toml", forced);
  std::ostringstream log, errs;
  HarnessOverrides ova, ovb;
  ova.out_dir = (dir / "a").string();
  ovb.out_dir = (dir / "b").string();
  REQUIRE(cmd_run(cfg_a.string(), ova, log, errs) == kExitOk);
  REQUIRE(cmd_run(cfg_b.string(), ovb, log, errs) == kExitOk);
  // The adaptive reconstruction under a forced-neutral clamp is bitwise the
  // baseline reconstruction.
  CHECK(slurp(dir / "b" / "reconstruction_saip.pgm") == slurp(dir / "b" / "reconstruction_baseline.pgm"));
  CHECK(slurp(dir / "a" / "reconstruction_baseline.pgm") == slurp(dir / "b" / "reconstruction_baseline.pgm"));
  fs::remove_all(dir);
}

TEST_CASE("cmd_run exit codes: missing and invalid configs") {
  std::ostringstream log, errs;
  CHECK(cmd_run("/nonexistent/config.toml", {}, log, errs) == kExitUsage);
  const fs::path dir = fresh_dir("badcfg");
  const fs::path bad = write_config(dir, "bad.toml", "[task]\nkind = \"denoise\"\nimage_size 16\n");
  CHECK(cmd_run(bad.string(), {}, log, errs) == kExitUsage);
  CHECK(errs.str().find("line 3") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("cmd_run: output directory falls back to the environment variable") {
  const fs::path dir = fresh_dir("envout");
  const fs::path cfg = write_config(dir, "cfg.toml", kDenoiseConfig);
  ::setenv(kOutDirEnvVar, (dir / "from_env").string().c_str(), 1);
  std::ostringstream log, errs;
  CHECK(cmd_run(cfg.string(), {}, log, errs) == kExitOk);
  CHECK(fs::exists(dir / "from_env" / "metrics.csv"));
  ::unsetenv(kOutDirEnvVar);
  fs::remove_all(dir);
}

TEST_CASE("trace deciles match a hand computation on a 10-row trace") {
  // Hand oracle: first decile of 10 rows is row 1, last decile is row 10.
  const std::vector<double> s{1.5, 1.1, 1.0, 0.9, 1.2, 1.0, 1.0, 1.0, 1.0, 1.04};
  const TraceDeciles d = trace_deciles(s);
  CHECK(d.first == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(d.last == doctest::Approx(0.04).epsilon(1e-12));
}

TEST_CASE("cmd_trace_plot: summary fields, flat disabled trace, malformed input") {
  const fs::path dir = fresh_dir("traceplot");
  // Build a trace via a tiny run with the adaptive module disabled.
  const std::string cfg_text = std::string(kDenoiseConfig);
  std::string disabled = cfg_text;
  const size_t pos = disabled.find("enabled = true");
  disabled.replace(pos, std::string("enabled = true").size(), "enabled = false");
  const fs::path cfg = write_config(dir, "cfg.toml", disabled);
  std::ostringstream log, errs;
  HarnessOverrides ov;
  ov.out_dir = (dir / "out").string();
  REQUIRE(cmd_run(cfg.string(), ov, log, errs) == kExitOk);

  std::ostringstream plot;
  CHECK(cmd_trace_plot((dir / "out" / "trace_baseline_chain000.csv").string(), {}, plot, errs) == kExitOk);
  CHECK(plot.str().find("mean|s-1| first decile: 0.000000") != std::string::npos);
  CHECK(plot.str().find("mean|s-1| last decile:  0.000000") != std::string::npos);
  CHECK(fs::exists(dir / "out" / "trace_baseline_chain000.dat"));

  const fs::path bad = write_config(dir, "bad.csv", "not,a,trace\n1,2,3\n");
  CHECK(cmd_trace_plot(bad.string(), {}, plot, errs) == kExitUsage);
  CHECK(cmd_trace_plot((dir / "missing.csv").string(), {}, plot, errs) == kExitUsage);
  fs::remove_all(dir);
}

TEST_CASE("cmd_run: runtime failures exit with code 1") {
  const fs::path dir = fresh_dir("runtime");
  const std::string cfg_text = std::string(kDenoiseConfig) + "\n[io]\ninput_image = \"/nonexistent.pgm\"\n";
  const fs::path cfg = write_config(dir, "cfg.toml", cfg_text);
  std::ostringstream log, errs;
  HarnessOverrides ov;
  ov.out_dir = (dir / "out").string();
  CHECK(cmd_run(cfg.string(), ov, log, errs) == kExitRuntime);
  fs::remove_all(dir);
}

TEST_CASE("verification report: unique check names, fault injection trips stationarity") {
  VerifyOptions quick;
  quick.score_fd_points = 3;
  quick.quadrature_points = 1;
  quick.saip_triples = 50;
  quick.posterior_grid = 50;
  quick.pigdm_points = 2;
  const auto clean = run_verification(quick);
  std::set<std::string> names;
  for (const auto& c : clean) {
    CHECK(names.insert(c.name).second);  // listed exactly once
    CHECK(c.pass);
  }

  VerifyOptions faulty = quick;
  faulty.saip_s_perturbation = 1e-3;
  const auto broken = run_verification(faulty);
  const auto it = std::find_if(broken.begin(), broken.end(),
                               [](const CheckResult& c) { return c.name == "saip-stationarity"; });
  REQUIRE(it != broken.end());
  CHECK_FALSE(it->pass);
}

TEST_CASE("sweep on the reference problem reproduces the frozen regression table") {
  // First-run distances frozen as the regression oracle for the stock
  // configs/toy2d.toml sweep; compared within +-10%.
  struct Row {
    double omega;
    const char* variant;
    double sw;
  };
  const std::vector<Row> frozen{
      {0.2, "baseline", 0.8949}, {0.2, "saip", 0.8153}, {0.5, "baseline", 0.7437}, {0.5, "saip", 0.6617},
      {1.0, "baseline", 0.6300}, {1.0, "saip", 0.6300}, {2.0, "baseline", 0.5710}, {2.0, "saip", 0.7966},
  };
  const fs::path dir = fresh_dir("regression");
  std::ostringstream log, errs;
  HarnessOverrides ov;
  ov.out_dir = dir.string();
  REQUIRE(cmd_sweep(std::string(SAIPLAB_SOURCE_DIR) + "/configs/toy2d.toml", {}, ov, log, errs) == kExitOk);
  std::istringstream sweep(slurp(dir / "sweep.csv"));
  std::string line;
  std::getline(sweep, line);
  size_t i = 0;
  while (std::getline(sweep, line)) {
    REQUIRE(i < frozen.size());
    std::stringstream ss(line);
    std::string omega, variant, sw;
    std::getline(ss, omega, ',');
    std::getline(ss, variant, ',');
    std::getline(ss, sw, ',');
    CHECK(std::stod(omega) == doctest::Approx(frozen[i].omega));
    CHECK(variant == frozen[i].variant);
    CHECK(std::stod(sw) == doctest::Approx(frozen[i].sw).epsilon(0.10));
    ++i;
  }
  CHECK(i == frozen.size());
  fs::remove_all(dir);
}

TEST_CASE("cmd_sweep: synthetic task required; rows written otherwise") {
  const fs::path dir = fresh_dir("sweep");
  std::ostringstream log, errs;
  const fs::path img_cfg = write_config(dir, "img.toml", kDenoiseConfig);
  HarnessOverrides ov;
  ov.out_dir = (dir / "o1").string();
  CHECK(cmd_sweep(img_cfg.string(), {0.5}, ov, log, errs) == kExitUsage);

  const std::string toy = R"(seed = 42
[task]
kind = "synthetic_gmm"
[task.gmm]
weights = [0.5, 0.3, 0.2]
means = [[-2.0, -2.0], [2.0, 1.0], [0.0, 3.0]]
covs = [[[0.5, 0.0], [0.0, 0.5]], [[0.5, 0.0], [0.0, 0.5]], [[0.5, 0.0], [0.0, 0.5]]]
operator_rows = [[1.0, 0.0]]
noise_std = 0.3
[sampler]
steps = 40
[guidance]
method = "dmps"
[sweep]
chains = 30
reference_samples = 100
)";
  const fs::path toy_cfg = write_config(dir, "toy.toml", toy);
  HarnessOverrides ov2;
  ov2.out_dir = (dir / "o2").string();
  REQUIRE(cmd_sweep(toy_cfg.string(), {0.5, 1.0}, ov2, log, errs) == kExitOk);
  std::istringstream sweep(slurp(dir / "o2" / "sweep.csv"));
  std::string line;
  std::getline(sweep, line);
  CHECK(line == "omega,variant,sw_distance,wall_time_s");
  int rows = 0;
  while (std::getline(sweep, line)) ++rows;
  CHECK(rows == 4);
  fs::remove_all(dir);
}
