#include "saiplab/saip.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "saiplab/errors.hpp"

namespace saiplab {

void SaipConfig::validate() const {
  if (!std::isfinite(omega)) throw ContractViolation("SaipConfig: omega must be finite");
  if (s_clamp) {
    const auto [lo, hi] = *s_clamp;
    if (!(lo <= 1.0 && 1.0 <= hi)) throw ContractViolation("SaipConfig: s_clamp must contain 1");
  }
}

double compute_scale(const SaipConfig& cfg, const Vector& prior_score, const Vector& likelihood_score,
                     bool* degenerate) {
  if (prior_score.size() != likelihood_score.size())
    throw ContractViolation("compute_scale: score length mismatch");
  if (degenerate) *degenerate = false;
  const double g_norm_sq = prior_score.squaredNorm();
  double s = 1.0;
  if (g_norm_sq < 1e-300) {
    if (degenerate) *degenerate = true;
  } else {
    const double gl = prior_score.dot(likelihood_score);
    s = cfg.variant == SaipVariant::likelihood_projection ? gl / g_norm_sq
                                                          : 1.0 + cfg.omega * gl / g_norm_sq;
  }
  if (cfg.s_clamp) s = std::clamp(s, cfg.s_clamp->first, cfg.s_clamp->second);
  return s;
}

Vector combine_scores(const SaipConfig& cfg, const Vector& prior_score, const Vector& likelihood_score, double s) {
  if (prior_score.size() != likelihood_score.size())
    throw ContractViolation("combine_scores: score length mismatch");
  if (!cfg.enabled || s == 1.0) return prior_score + cfg.omega * likelihood_score;
  const double prior_coeff = 1.0 + (s - 1.0) * (1.0 - cfg.omega);
  return prior_coeff * prior_score + cfg.omega * likelihood_score;
}

double upper_bound_loss(double s, const Vector& prior_score, const Vector& likelihood_score) {
  if (prior_score.size() != likelihood_score.size())
    throw ContractViolation("upper_bound_loss: score length mismatch");
  return (likelihood_score - s * prior_score).squaredNorm();
}

void record_step(SaipTrace& trace, int t, double s, double omega, const Vector& prior_score,
                 const Vector& likelihood_score, bool degenerate_prior) {
  SaipStepRecord r;
  r.t = t;
  r.s = s;
  r.omega = omega;
  r.prior_norm_sq = prior_score.squaredNorm();
  r.dot_prior_likelihood = prior_score.dot(likelihood_score);
  r.dot_prior_posterior = r.prior_norm_sq + omega * r.dot_prior_likelihood;
  r.offset_norm = std::abs(s - 1.0) * std::abs(1.0 - omega) * std::sqrt(r.prior_norm_sq);
  r.degenerate_prior = degenerate_prior;
  trace.push_back(r);
}

namespace {

std::string fmt_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_trace_csv(std::ostream& out, const SaipTrace& trace) {
  out << "t,s,omega,prior_norm_sq,dot_prior_likelihood,dot_prior_posterior,offset_norm\n";
  for (const auto& r : trace) {
    out << r.t << ',' << fmt_full(r.s) << ',' << fmt_full(r.omega) << ',' << fmt_full(r.prior_norm_sq) << ','
        << fmt_full(r.dot_prior_likelihood) << ',' << fmt_full(r.dot_prior_posterior) << ','
        << fmt_full(r.offset_norm) << '\n';
  }
}

SaipTrace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) ||
      line.rfind("t,s,omega,prior_norm_sq,dot_prior_likelihood,dot_prior_posterior,offset_norm", 0) != 0)
    throw ConfigError("trace CSV: missing or malformed header");
  SaipTrace trace;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7) throw ConfigError("trace CSV: expected 7 columns", line_no);
    SaipStepRecord r;
    try {
      r.t = std::stoi(cells[0]);
      r.s = std::stod(cells[1]);
      r.omega = std::stod(cells[2]);
      r.prior_norm_sq = std::stod(cells[3]);
      r.dot_prior_likelihood = std::stod(cells[4]);
      r.dot_prior_posterior = std::stod(cells[5]);
      r.offset_norm = std::stod(cells[6]);
    } catch (const std::exception&) {
      throw ConfigError("trace CSV: non-numeric cell", line_no);
    }
    trace.push_back(r);
  }
  return trace;
}

const char* to_string(SaipVariant v) {
  return v == SaipVariant::posterior_projection ? "posterior-projection" : "likelihood-projection";
}

SaipVariant saip_variant_from_string(const std::string& s) {
  if (s == "posterior-projection") return SaipVariant::posterior_projection;
  if (s == "likelihood-projection") return SaipVariant::likelihood_projection;
  throw ConfigError("unknown saip variant '" + s + "' (expected posterior-projection or likelihood-projection)");
}

}  // namespace saiplab
