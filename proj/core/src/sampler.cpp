#include "saiplab/sampler.hpp"

#include <chrono>
#include <cstdio>
#include <cstring>
#include <thread>

#include "saiplab/errors.hpp"
#include "saiplab/metrics.hpp"
#include "saiplab/signal.hpp"

namespace saiplab {

namespace {

// Peak RSS in bytes from /proc/self/status (Linux); 0 when unavailable.
std::uint64_t peak_rss_bytes() {
  std::FILE* f = std::fopen("/proc/self/status", "r");
  if (!f) return 0;
  char line[256];
  std::uint64_t kb = 0;
  while (std::fgets(line, sizeof(line), f)) {
    if (std::strncmp(line, "VmHWM:", 6) == 0) {
      std::sscanf(line + 6, "%lu", &kb);
      break;
    }
  }
  std::fclose(f);
  return kb * 1024;
}

void run_chain(const SamplerConfig& cfg, const GuidanceEngine& engine, const PriorScoreSource& prior_source,
               const Vector& y, int chain_index, ChainResult& out) {
  try {
    Rng rng = Rng::for_chain(cfg.seed, chain_index);
    DiffusionState state{rng.standard_normal(static_cast<int>(out.sample.size())), cfg.schedule.steps()};
    out.trace.clear();
    out.trace.reserve(cfg.schedule.steps());
    for (int t = cfg.schedule.steps(); t >= 1; --t) {
      state.t = t;
      const Vector g = prior_source.score(state.x, t);
      const GuidanceOutput guid = engine.estimate(y, state, g);
      SaipConfig step_cfg = cfg.saip;
      step_cfg.omega = guid.effective_scale;
      bool degenerate = false;
      const double s = step_cfg.enabled
                           ? compute_scale(step_cfg, g, guid.likelihood_score, &degenerate)
                           : 1.0;
      const Vector combined = combine_scores(step_cfg, g, guid.likelihood_score, s);
      record_step(out.trace, t, s, step_cfg.omega, g, guid.likelihood_score, degenerate);
      state = reverse_step(cfg.schedule, state, combined, rng);
    }
    ensure_finite(state.x, "sampler terminal state");
    out.sample = state.x;
    out.ok = true;
  } catch (const std::exception& e) {
    out.ok = false;
    out.error = e.what();
  }
}

}  // namespace

void SamplerConfig::validate() const {
  if (chains < 1) throw ContractViolation("SamplerConfig: chains must be >= 1");
  if (threads < 1) throw ContractViolation("SamplerConfig: threads must be >= 1");
  guidance.validate();
  saip.validate();
}

std::vector<Vector> RunResult::samples() const {
  std::vector<Vector> out;
  out.reserve(chains.size());
  for (const auto& c : chains)
    if (c.ok) out.push_back(c.sample);
  return out;
}

RunResult sample_posterior(const SamplerConfig& cfg, const Gmm& prior, const MeasurementModel& model,
                           const Vector& y) {
  cfg.validate();
  if (model.op->in_dim() != prior.dim()) throw ContractViolation("sample_posterior: operator/prior mismatch");
  if (y.size() != model.op->out_dim()) throw ContractViolation("sample_posterior: y dimension mismatch");

  auto source = std::make_shared<GmmScoreSource>(prior, cfg.schedule);
  std::shared_ptr<const ExactScoreOracle> oracle;
  if (cfg.guidance.kind == GuidanceKind::exact ||
      (cfg.guidance.kind == GuidanceKind::pigdm && cfg.guidance.pigdm_r2_mode == PigdmR2Mode::exact_gaussian))
    oracle = std::make_shared<ExactScoreOracle>(prior, cfg.schedule, model);
  GuidanceEngine engine(cfg.guidance, model, cfg.schedule, source, oracle);

  RunResult result;
  result.chains.assign(cfg.chains, ChainResult{});
  for (auto& c : result.chains) c.sample = Vector::Zero(prior.dim());

  const std::uint64_t rss_before = peak_rss_bytes();
  const auto t0 = std::chrono::steady_clock::now();

  const int threads = std::min(cfg.threads, cfg.chains);
  if (threads <= 1) {
    for (int c = 0; c < cfg.chains; ++c) run_chain(cfg, engine, *source, y, c, result.chains[c]);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (int c = w; c < cfg.chains; c += threads) run_chain(cfg, engine, *source, y, c, result.chains[c]);
      });
    }
    for (auto& th : pool) th.join();
  }

  result.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const std::uint64_t rss_after = peak_rss_bytes();
  result.peak_extra_memory_bytes = rss_after > rss_before ? rss_after - rss_before : 0;
  return result;
}

std::vector<SweepRow> sweep_scale(const SamplerConfig& base, const Gmm& prior, const MeasurementModel& model,
                                  const Vector& y, const std::vector<double>& omegas, int reference_samples,
                                  int projections, std::uint64_t metric_seed) {
  const Gmm posterior = exact_posterior(prior, model, y);
  Rng ref_rng(metric_seed);
  const std::vector<Vector> reference = posterior.sample_many(ref_rng, reference_samples);

  std::vector<SweepRow> rows;
  for (double omega : omegas) {
    for (bool adaptive : {false, true}) {
      SamplerConfig cfg = base;
      cfg.guidance.scale_param = omega;
      cfg.saip.enabled = adaptive;
      const RunResult run = sample_posterior(cfg, prior, model, y);
      Rng proj_rng(metric_seed);
      SweepRow row;
      row.omega = omega;
      row.variant = adaptive ? "saip" : "baseline";
      row.sw_distance = sliced_wasserstein(run.samples(), reference, projections, proj_rng);
      row.wall_time_s = run.wall_time_seconds;
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace saiplab
