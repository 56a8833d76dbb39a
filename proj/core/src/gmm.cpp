#include "saiplab/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "saiplab/errors.hpp"
#include "saiplab/signal.hpp"

namespace saiplab {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
// Responsibility exponents are clamped here so extreme query points can
// never produce 0 * inf patterns downstream.
constexpr double kMinLogResp = -700.0;

double log_sum_exp(const std::vector<double>& v) {
  double mx = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (double x : v) acc += std::exp(std::max(x - mx, kMinLogResp));
  return mx + std::log(acc);
}

std::vector<double> softmax_clamped(const std::vector<double>& logits) {
  double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> w(logits.size());
  double total = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    w[i] = std::exp(std::max(logits[i] - mx, kMinLogResp));
    total += w[i];
  }
  for (double& x : w) x /= total;
  return w;
}

double log_normal_pdf(const Vector& x, const Vector& mean, const Covariance& cov) {
  const Vector d = x - mean;
  return -0.5 * (d.dot(cov.solve(d)) + cov.log_det() + d.size() * kLog2Pi);
}

}  // namespace

Gmm::Gmm(std::vector<double> weights, std::vector<GmmComponent> components)
    : weights_(std::move(weights)), comps_(std::move(components)) {
  if (comps_.empty() || weights_.size() != comps_.size())
    throw ContractViolation("Gmm: weights and components must be non-empty and match");
  dim_ = static_cast<int>(comps_.front().mean.size());
  double total = 0.0;
  for (size_t k = 0; k < comps_.size(); ++k) {
    if (weights_[k] < 0.0) throw ContractViolation("Gmm: weights must be nonnegative");
    total += weights_[k];
    if (comps_[k].mean.size() != dim_ || comps_[k].cov.dim() != dim_)
      throw ContractViolation("Gmm: component dimension mismatch");
  }
  if (std::abs(total - 1.0) > 1e-12) throw ContractViolation("Gmm: weights must sum to 1");
}

double Gmm::log_pdf(const Vector& x) const {
  std::vector<double> lw(comps_.size());
  for (size_t k = 0; k < comps_.size(); ++k)
    lw[k] = std::log(std::max(weights_[k], 1e-300)) + log_normal_pdf(x, comps_[k].mean, comps_[k].cov);
  return log_sum_exp(lw);
}

Vector Gmm::sample(Rng& rng) const {
  const double u = rng.uniform01();
  double acc = 0.0;
  size_t pick = comps_.size() - 1;
  for (size_t k = 0; k < comps_.size(); ++k) {
    acc += weights_[k];
    if (u < acc) {
      pick = k;
      break;
    }
  }
  const auto& c = comps_[pick];
  return c.mean + c.cov.chol_mul(rng.standard_normal(dim_));
}

std::vector<Vector> Gmm::sample_many(Rng& rng, int n) const {
  if (n < 1) throw ContractViolation("Gmm::sample_many: n must be >= 1");
  std::vector<Vector> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(sample(rng));
  return out;
}

Gmm diffuse(const Gmm& prior, double alpha_bar) {
  if (!(alpha_bar > 0.0) || alpha_bar > 1.0)
    throw ContractViolation("diffuse: alpha_bar must be in (0, 1]");
  const double root = std::sqrt(alpha_bar);
  std::vector<GmmComponent> comps;
  comps.reserve(prior.component_count());
  for (int k = 0; k < prior.component_count(); ++k) {
    const auto& c = prior.component(k);
    comps.push_back({root * c.mean, c.cov.scaled_plus_identity(alpha_bar, 1.0 - alpha_bar)});
  }
  return Gmm(prior.weights(), std::move(comps));
}

MixtureEval eval_mixture(const Gmm& mixture, const Vector& x) {
  if (x.size() != mixture.dim()) throw ContractViolation("eval_mixture: dimension mismatch");
  const int kk = mixture.component_count();
  std::vector<double> logits(kk);
  MixtureEval ev;
  ev.comp_scores.resize(kk);
  for (int k = 0; k < kk; ++k) {
    const auto& c = mixture.component(k);
    const Vector d = x - c.mean;
    const Vector solved = c.cov.solve(d);
    logits[k] = std::log(std::max(mixture.weights()[k], 1e-300)) -
                0.5 * (d.dot(solved) + c.cov.log_det() + d.size() * kLog2Pi);
    ev.comp_scores[k] = -solved;
  }
  ev.log_pdf = log_sum_exp(logits);
  ev.resp = softmax_clamped(logits);
  ev.score = Vector::Zero(x.size());
  for (int k = 0; k < kk; ++k) ev.score += ev.resp[k] * ev.comp_scores[k];
  ensure_finite(ev.score, "mixture score");
  return ev;
}

Vector mixture_score(const Gmm& mixture, const Vector& x) { return eval_mixture(mixture, x).score; }

Vector mixture_hessian_matvec(const Gmm& mixture, const MixtureEval& eval, const Vector& x, const Vector& v) {
  if (v.size() != x.size()) throw ContractViolation("hessian_matvec: dimension mismatch");
  Vector out = -eval.score * eval.score.dot(v);
  for (int k = 0; k < mixture.component_count(); ++k) {
    const auto& sk = eval.comp_scores[k];
    out += eval.resp[k] * (sk * sk.dot(v) - mixture.component(k).cov.solve(v));
  }
  return out;
}

Matrix mixture_hessian(const Gmm& mixture, const Vector& x) {
  const MixtureEval ev = eval_mixture(mixture, x);
  const int n = static_cast<int>(x.size());
  Matrix h = -ev.score * ev.score.transpose();
  for (int k = 0; k < mixture.component_count(); ++k) {
    const auto& sk = ev.comp_scores[k];
    h += ev.resp[k] * (sk * sk.transpose() - mixture.component(k).cov.solve_matrix(Matrix::Identity(n, n)));
  }
  return h;
}

Vector prior_score(const Gmm& prior, const NoiseSchedule& sched, const Vector& x_t, int t) {
  return mixture_score(diffuse(prior, sched.alpha_bar(t)), x_t);
}

Gmm exact_posterior(const Gmm& prior, const MeasurementModel& model, const Vector& y) {
  if (!(model.noise_std > 0.0)) throw ContractViolation("exact_posterior: noise_std must be positive");
  const Matrix a = dense_materialize(*model.op);
  if (y.size() != a.rows()) throw ContractViolation("exact_posterior: y dimension mismatch");
  const double inv_var = 1.0 / (model.noise_std * model.noise_std);
  const int n = prior.dim();
  const Matrix ata = a.transpose() * a;

  std::vector<double> log_ev(prior.component_count());
  std::vector<GmmComponent> comps;
  comps.reserve(prior.component_count());
  for (int k = 0; k < prior.component_count(); ++k) {
    const auto& c = prior.component(k);
    // Conjugate update in precision form.
    Matrix precision = c.cov.solve_matrix(Matrix::Identity(n, n)) + inv_var * ata;
    Eigen::LLT<Matrix> llt(0.5 * (precision + precision.transpose()));
    if (llt.info() != Eigen::Success)
      throw NotPositiveDefinite("exact_posterior: posterior precision not SPD");
    Matrix post_cov = llt.solve(Matrix::Identity(n, n));
    post_cov = 0.5 * (post_cov + post_cov.transpose());
    Vector post_mean = llt.solve(c.cov.solve(c.mean) + inv_var * a.transpose() * y);

    // Component evidence: y | k  ~  N(A mu_k, A Sigma_k A^T + sigma^2 I).
    Matrix obs = a * c.cov.to_dense() * a.transpose();
    obs.diagonal().array() += model.noise_std * model.noise_std;
    Eigen::LLT<Matrix> obs_llt(0.5 * (obs + obs.transpose()));
    if (obs_llt.info() != Eigen::Success)
      throw NotPositiveDefinite("exact_posterior: evidence covariance not SPD");
    const Vector r = y - a * c.mean;
    const Vector solved = obs_llt.solve(r);
    const double log_det = 2.0 * Matrix(obs_llt.matrixL()).diagonal().array().log().sum();
    log_ev[k] = std::log(std::max(prior.weights()[k], 1e-300)) -
                0.5 * (r.dot(solved) + log_det + r.size() * kLog2Pi);
    comps.push_back({std::move(post_mean), Covariance::dense(std::move(post_cov))});
  }
  std::vector<double> w = softmax_clamped(log_ev);
  // Renormalize exactly so the Gmm constructor's sum-to-one check passes.
  double total = 0.0;
  for (double x : w) total += x;
  for (double& x : w) x /= total;
  return Gmm(std::move(w), std::move(comps));
}

ExactScoreOracle::ExactScoreOracle(Gmm prior, NoiseSchedule sched, MeasurementModel model)
    : prior_(std::move(prior)), sched_(std::move(sched)), model_(std::move(model)) {
  a_dense_ = dense_materialize(*model_.op);
  if (model_.op->in_dim() != prior_.dim())
    throw ContractViolation("ExactScoreOracle: operator input dimension mismatch");
}

auto ExactScoreOracle::per_t(int t) const -> const PerT& {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(t);
    if (it != cache_.end()) return *it->second;
  }
  const double a = sched_.alpha_bar(t);
  const double root = std::sqrt(a);
  auto entry = std::make_shared<PerT>(diffuse(prior_, a));
  const int n = prior_.dim();
  const double sig2 = model_.noise_std * model_.noise_std;
  for (int k = 0; k < prior_.component_count(); ++k) {
    const Covariance& sigma = prior_.component(k).cov;
    const Covariance& c = entry->diffused.component(k).cov;
    const Matrix sigma_d = sigma.to_dense();
    const Matrix c_inv_sigma = c.solve_matrix(sigma_d);
    Matrix gain = root * c_inv_sigma.transpose();  // sqrt(a) Sigma C^{-1}
    Matrix cond_var = sigma_d - a * sigma_d * c_inv_sigma;
    cond_var = 0.5 * (cond_var + cond_var.transpose());
    Matrix obs = a_dense_ * cond_var * a_dense_.transpose();
    obs.diagonal().array() += sig2;
    Eigen::LLT<Matrix> llt(0.5 * (obs + obs.transpose()));
    if (llt.info() != Eigen::Success)
      throw DegenerateError("likelihood score: observation covariance not SPD (noise-free rank-deficient operator?)");
    entry->obs_log_det.push_back(2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum());
    entry->gain.push_back(std::move(gain));
    entry->cond_var.push_back(std::move(cond_var));
    entry->obs_llt.push_back(std::move(llt));
  }
  std::lock_guard<std::mutex> lock(mu_);
  auto [it, inserted] = cache_.emplace(t, std::move(entry));
  (void)inserted;  // a racing insert of the identical value is benign
  return *it->second;
}

Vector ExactScoreOracle::likelihood_score(const Vector& y, const Vector& x_t, int t) const {
  const PerT& pt = per_t(t);
  const MixtureEval ev = eval_mixture(pt.diffused, x_t);
  const int kk = prior_.component_count();
  const int m = static_cast<int>(y.size());
  std::vector<double> logits(kk);
  std::vector<Vector> grads(kk);
  for (int k = 0; k < kk; ++k) {
    const Vector e = prior_.component(k).mean + pt.gain[k] * (x_t - pt.diffused.component(k).mean);
    const Vector r = y - a_dense_ * e;
    const Vector solved = pt.obs_llt[k].solve(r);
    logits[k] = std::log(std::max(ev.resp[k], 1e-300)) -
                0.5 * (r.dot(solved) + pt.obs_log_det[k] + m * kLog2Pi);
    grads[k] = (ev.comp_scores[k] - ev.score) + pt.gain[k].transpose() * (a_dense_.transpose() * solved);
  }
  const std::vector<double> rho = softmax_clamped(logits);
  Vector out = Vector::Zero(x_t.size());
  for (int k = 0; k < kk; ++k) out += rho[k] * grads[k];
  ensure_finite(out, "likelihood score");
  return out;
}

double ExactScoreOracle::log_likelihood(const Vector& y, const Vector& x_t, int t) const {
  const PerT& pt = per_t(t);
  const int kk = prior_.component_count();
  const int m = static_cast<int>(y.size());
  // log p(y, x_t) - log p(x_t), both as exact mixture log-sums.
  std::vector<double> joint(kk), marg(kk);
  for (int k = 0; k < kk; ++k) {
    const auto& dc = pt.diffused.component(k);
    const double lw = std::log(std::max(prior_.weights()[k], 1e-300));
    marg[k] = lw + log_normal_pdf(x_t, dc.mean, dc.cov);
    const Vector e = prior_.component(k).mean + pt.gain[k] * (x_t - dc.mean);
    const Vector r = y - a_dense_ * e;
    const Vector solved = pt.obs_llt[k].solve(r);
    joint[k] = marg[k] - 0.5 * (r.dot(solved) + pt.obs_log_det[k] + m * kLog2Pi);
  }
  return log_sum_exp(joint) - log_sum_exp(marg);
}

Vector ExactScoreOracle::posterior_score(const Vector& y, const Vector& x_t, int t) const {
  return prior_score_at(x_t, t) + likelihood_score(y, x_t, t);
}

Vector ExactScoreOracle::prior_score_at(const Vector& x_t, int t) const {
  return mixture_score(per_t(t).diffused, x_t);
}

Vector ExactScoreOracle::conditional_mean(const Vector& x_t, int t) const {
  const PerT& pt = per_t(t);
  const MixtureEval ev = eval_mixture(pt.diffused, x_t);
  Vector out = Vector::Zero(x_t.size());
  for (int k = 0; k < prior_.component_count(); ++k) {
    const Vector e = prior_.component(k).mean + pt.gain[k] * (x_t - pt.diffused.component(k).mean);
    out += ev.resp[k] * e;
  }
  return out;
}

double ExactScoreOracle::scalar_conditional_variance(int t) const {
  if (prior_.component_count() != 1)
    throw ContractViolation("scalar_conditional_variance: single-component prior required");
  const PerT& pt = per_t(t);
  return pt.cond_var[0].trace() / prior_.dim();
}

}  // namespace saiplab
