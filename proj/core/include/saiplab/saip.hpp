#pragma once

#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "saiplab/linalg.hpp"

namespace saiplab {

/// Which inner-product ratio defines the adaptive scale s.
///
/// posterior_projection projects the combined estimate g + omega*l onto the
/// prior-score direction:            s = <g + omega*l, g> / |g|^2.
/// likelihood_projection is the stationary point of the surrogate loss
/// |l - s*g|^2:                      s = <l, g> / |g|^2.
/// The two are related by s_post = 1 + omega * s_lik.
enum class SaipVariant { posterior_projection, likelihood_projection };

struct SaipConfig {
  bool enabled = false;
  /// Guidance strength the offset couples to. When adapting a baseline this
  /// is the baseline's scale at each application point (possibly per-step).
  double omega = 1.0;
  SaipVariant variant = SaipVariant::posterior_projection;
  /// Optional clamp (lo, hi) applied to s; must contain 1 so clamping can
  /// always fall back to baseline behavior.
  std::optional<std::pair<double, double>> s_clamp;

  void validate() const;
};

/// One reverse-step record; the s column over t is the diagnostic curve
/// exported by the trace CSV.
struct SaipStepRecord {
  int t = 0;
  double s = 1.0;
  double omega = 1.0;
  double prior_norm_sq = 0.0;
  double dot_prior_likelihood = 0.0;
  double dot_prior_posterior = 0.0;
  double offset_norm = 0.0;
  /// Set when |g|^2 underflowed and s fell back to 1 (not serialized).
  bool degenerate_prior = false;
};

using SaipTrace = std::vector<SaipStepRecord>;

/// Closed-form adaptive scale for the given prior/likelihood scores.
/// A vanishing |g|^2 (< 1e-300) returns the neutral s = 1 and sets
/// *degenerate when provided; the offset it would scale is itself vanishing.
double compute_scale(const SaipConfig& cfg, const Vector& prior_score, const Vector& likelihood_score,
                     bool* degenerate = nullptr);

/// Combined update [1 + (s - 1)(1 - omega)] * g + omega * l. With the module
/// disabled or s == 1 this is exactly the baseline combination g + omega * l
/// (same expression, bit for bit).
Vector combine_scores(const SaipConfig& cfg, const Vector& prior_score, const Vector& likelihood_score, double s);

/// Surrogate objective |l - s*g|^2 whose minimizer is the
/// likelihood_projection scale.
double upper_bound_loss(double s, const Vector& prior_score, const Vector& likelihood_score);

/// Appends one fully populated record for a reverse step.
void record_step(SaipTrace& trace, int t, double s, double omega, const Vector& prior_score,
                 const Vector& likelihood_score, bool degenerate_prior = false);

/// Trace CSV with the fixed column order
/// t,s,omega,prior_norm_sq,dot_prior_likelihood,dot_prior_posterior,offset_norm.
void write_trace_csv(std::ostream& out, const SaipTrace& trace);
SaipTrace read_trace_csv(std::istream& in);

const char* to_string(SaipVariant v);
SaipVariant saip_variant_from_string(const std::string& s);

}  // namespace saiplab
