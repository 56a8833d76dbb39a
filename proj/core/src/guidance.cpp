#include "saiplab/guidance.hpp"

#include <cmath>

#include "saiplab/errors.hpp"
#include "saiplab/signal.hpp"

namespace saiplab {

void GuidanceMethod::validate() const {
  if (!(scale_param > 0.0) || !std::isfinite(scale_param))
    throw ContractViolation("GuidanceMethod: scale_param must be positive and finite");
}

GmmScoreSource::GmmScoreSource(Gmm prior, NoiseSchedule sched) : prior_(std::move(prior)), sched_(std::move(sched)) {}

const Gmm& GmmScoreSource::diffused(int t) const {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(t);
    if (it != cache_.end()) return *it->second;
  }
  auto built = std::make_shared<const Gmm>(diffuse(prior_, sched_.alpha_bar(t)));
  std::lock_guard<std::mutex> lock(mu_);
  auto [it, inserted] = cache_.emplace(t, std::move(built));
  (void)inserted;
  return *it->second;
}

Vector GmmScoreSource::score(const Vector& x, int t) const { return mixture_score(diffused(t), x); }

Vector GmmScoreSource::hessian_matvec(const Vector& x, int t, const Vector& v) const {
  const Gmm& d = diffused(t);
  return mixture_hessian_matvec(d, eval_mixture(d, x), x, v);
}

ExternalScoreSource::ExternalScoreSource(ScoreFn fn, double fd_step) : fn_(std::move(fn)), h_(fd_step) {
  if (!fn_) throw ContractViolation("ExternalScoreSource: score function required");
  if (!(h_ > 0.0)) throw ContractViolation("ExternalScoreSource: fd_step must be positive");
}

Vector ExternalScoreSource::score(const Vector& x, int t) const { return fn_(x, t); }

Vector ExternalScoreSource::hessian_matvec(const Vector& x, int t, const Vector& v) const {
  // Central difference along v; the Hessian of a log density is symmetric,
  // so the directional derivative of the score is the matvec we need.
  const double norm = v.norm();
  if (norm == 0.0) return Vector::Zero(v.size());
  const Vector dir = v / norm;
  return (fn_(x + h_ * dir, t) - fn_(x - h_ * dir, t)) * (norm / (2.0 * h_));
}

GuidanceEngine::GuidanceEngine(GuidanceMethod method, MeasurementModel model, NoiseSchedule sched,
                               std::shared_ptr<const PriorScoreSource> prior_source,
                               std::shared_ptr<const ExactScoreOracle> oracle)
    : method_(method),
      model_(std::move(model)),
      sched_(std::move(sched)),
      prior_source_(std::move(prior_source)),
      oracle_(std::move(oracle)) {
  method_.validate();
  if (!prior_source_) throw ContractViolation("GuidanceEngine: prior score source required");
  if (method_.kind == GuidanceKind::exact && !oracle_)
    throw ContractViolation("GuidanceEngine: exact guidance requires the score oracle");
  gram_identity_ = model_.op->gram_is_identity();
  if (!gram_identity_ && (method_.kind == GuidanceKind::pigdm || method_.kind == GuidanceKind::dmps)) {
    const Matrix a = dense_materialize(*model_.op);
    gram_ = a * a.transpose();
  }
}

Vector GuidanceEngine::solve_gram(double coeff, const Vector& r, int t) const {
  const double sig2 = model_.noise_std * model_.noise_std;
  if (gram_identity_) return r / (coeff + sig2);
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = gram_cache_.find(t);
    if (it != gram_cache_.end()) return it->second->solve(r);
  }
  Matrix m = coeff * gram_;
  m.diagonal().array() += sig2;
  auto llt = std::make_shared<Eigen::LLT<Matrix>>(m);
  if (llt->info() != Eigen::Success) throw DegenerateError("guidance: Gram system not positive definite");
  std::lock_guard<std::mutex> lock(mu_);
  auto [it, inserted] = gram_cache_.emplace(t, std::move(llt));
  (void)inserted;
  return it->second->solve(r);
}

Vector GuidanceEngine::jacobian_matvec(const Vector& x, int t, const Vector& v) const {
  // d x0_hat / d x_t = (I + (1 - alpha_bar) H) / sqrt(alpha_bar), symmetric.
  const double a = sched_.alpha_bar(t);
  return (v + (1.0 - a) * prior_source_->hessian_matvec(x, t, v)) / std::sqrt(a);
}

GuidanceOutput GuidanceEngine::estimate(const Vector& y, const DiffusionState& state, const Vector& prior_score) const {
  const auto& op = *model_.op;
  if (state.x.size() != op.in_dim() || y.size() != op.out_dim())
    throw ContractViolation("guidance: dimension mismatch");
  const double a = sched_.alpha_bar(state.t);
  const double sig2 = model_.noise_std * model_.noise_std;
  GuidanceOutput out;
  out.effective_scale = method_.scale_param;

  switch (method_.kind) {
    case GuidanceKind::exact: {
      out.likelihood_score = oracle_->likelihood_score(y, state.x, state.t);
      break;
    }
    case GuidanceKind::dps: {
      const Vector x0_hat = tweedie_denoise(sched_, state, prior_score);
      const Vector r = y - op.apply(x0_hat);
      out.likelihood_score = jacobian_matvec(state.x, state.t, op.adjoint(r)) / sig2;
      if (!method_.dps_constant_scale)
        out.effective_scale = method_.scale_param / std::max(r.norm(), 1e-12);
      break;
    }
    case GuidanceKind::pigdm: {
      const Vector x0_hat = tweedie_denoise(sched_, state, prior_score);
      const Vector r = y - op.apply(x0_hat);
      double r2;
      if (method_.pigdm_r2_mode == PigdmR2Mode::heuristic) {
        const double v = (1.0 - a) / a;
        r2 = v / (1.0 + v);
      } else {
        if (!oracle_)
          throw ContractViolation("pigdm exact_gaussian mode requires the score oracle");
        r2 = oracle_->scalar_conditional_variance(state.t);
      }
      const Vector solved = solve_gram(r2, r, state.t);
      out.likelihood_score = jacobian_matvec(state.x, state.t, op.adjoint(solved));
      break;
    }
    case GuidanceKind::dmps: {
      const double root = std::sqrt(a);
      const Vector r = y - op.apply(state.x / root);
      const Vector solved = solve_gram((1.0 - a) / a, r, state.t);
      out.likelihood_score = op.adjoint(solved) / root;
      break;
    }
  }
  ensure_finite(out.likelihood_score, "guidance estimate");
  return out;
}

GuidanceOutput estimate_likelihood_score(const GuidanceMethod& method, const Gmm& prior, const NoiseSchedule& sched,
                                         const MeasurementModel& model, const Vector& y, const DiffusionState& state) {
  auto source = std::make_shared<GmmScoreSource>(prior, sched);
  std::shared_ptr<const ExactScoreOracle> oracle;
  if (method.kind == GuidanceKind::exact ||
      (method.kind == GuidanceKind::pigdm && method.pigdm_r2_mode == PigdmR2Mode::exact_gaussian))
    oracle = std::make_shared<ExactScoreOracle>(prior, sched, model);
  GuidanceEngine engine(method, model, sched, source, oracle);
  return engine.estimate(y, state, source->score(state.x, state.t));
}

double approximation_error(const GuidanceMethod& method, const Gmm& prior, const NoiseSchedule& sched,
                           const MeasurementModel& model, const Vector& y, const DiffusionState& state) {
  const GuidanceOutput est = estimate_likelihood_score(method, prior, sched, model, y, state);
  ExactScoreOracle oracle(prior, sched, model);
  const Vector exact = oracle.likelihood_score(y, state.x, state.t);
  return (est.likelihood_score - exact).norm() / (exact.norm() + 1e-12);
}

const char* to_string(GuidanceKind k) {
  switch (k) {
    case GuidanceKind::dps: return "dps";
    case GuidanceKind::dmps: return "dmps";
    case GuidanceKind::pigdm: return "pigdm";
    case GuidanceKind::exact: return "exact";
  }
  return "?";
}

GuidanceKind guidance_kind_from_string(const std::string& s) {
  if (s == "dps") return GuidanceKind::dps;
  if (s == "dmps") return GuidanceKind::dmps;
  if (s == "pigdm") return GuidanceKind::pigdm;
  if (s == "exact") return GuidanceKind::exact;
  throw ConfigError("unknown guidance method '" + s + "'");
}

const char* to_string(PigdmR2Mode m) { return m == PigdmR2Mode::heuristic ? "heuristic" : "exact_gaussian"; }

PigdmR2Mode pigdm_r2_from_string(const std::string& s) {
  if (s == "heuristic") return PigdmR2Mode::heuristic;
  if (s == "exact_gaussian") return PigdmR2Mode::exact_gaussian;
  throw ConfigError("unknown pigdm r2 mode '" + s + "'");
}

}  // namespace saiplab
