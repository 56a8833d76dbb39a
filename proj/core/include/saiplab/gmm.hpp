#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "saiplab/linalg.hpp"
#include "saiplab/operators.hpp"
#include "saiplab/rng.hpp"
#include "saiplab/schedule.hpp"

namespace saiplab {

struct GmmComponent {
  Vector mean;
  Covariance cov;
};

/// Finite Gaussian mixture. Weights are validated to be nonnegative and to
/// sum to one; every covariance must pass its Cholesky factorization.
class Gmm {
 public:
  Gmm(std::vector<double> weights, std::vector<GmmComponent> components);

  int dim() const { return dim_; }
  int component_count() const { return static_cast<int>(comps_.size()); }
  const std::vector<double>& weights() const { return weights_; }
  const GmmComponent& component(int k) const { return comps_[k]; }

  double log_pdf(const Vector& x) const;
  Vector sample(Rng& rng) const;
  std::vector<Vector> sample_many(Rng& rng, int n) const;

 private:
  std::vector<double> weights_;
  std::vector<GmmComponent> comps_;
  int dim_;
};

/// Mixture of x_t = sqrt(a) x0 + sqrt(1-a) eps for x0 ~ prior:
/// weights unchanged, means scaled by sqrt(a), covariances a*Sigma + (1-a)I.
/// Reduces to the prior at a == 1.
Gmm diffuse(const Gmm& prior, double alpha_bar);

/// Score evaluation detail for one point: per-component responsibilities
/// (computed in log space, clamped at exp(-700)), per-component scores
/// s_k = -C_k^{-1}(x - m_k), their mixture s̄, and the log density.
struct MixtureEval {
  double log_pdf = 0.0;
  Vector score;
  std::vector<double> resp;
  std::vector<Vector> comp_scores;
};

MixtureEval eval_mixture(const Gmm& mixture, const Vector& x);

/// Gradient of log density of `mixture` at x (finite for any finite x).
Vector mixture_score(const Gmm& mixture, const Vector& x);

/// Hessian-vector product of log density at x, using the evaluation detail:
/// H v = sum_k w_k (s_k <s_k, v> - C_k^{-1} v) - s̄ <s̄, v>.
Vector mixture_hessian_matvec(const Gmm& mixture, const MixtureEval& eval, const Vector& x, const Vector& v);

/// Dense Hessian of log density (desk scale; used by oracles and tests).
Matrix mixture_hessian(const Gmm& mixture, const Vector& x);

/// Exact diffused prior score: gradient of log p(x_t) at timestep t.
Vector prior_score(const Gmm& prior, const NoiseSchedule& sched, const Vector& x_t, int t);

/// Exact posterior p(x0 | y) for y = A x0 + sigma eps as a new mixture
/// (conjugate per-component update, reweighted by component evidences).
/// Requires sigma > 0 and a materializable operator.
Gmm exact_posterior(const Gmm& prior, const MeasurementModel& model, const Vector& y);

/// Per-(component, timestep) conditional algebra for the exact likelihood
/// score, cached on demand; safe for concurrent use from multiple chains.
///
/// Per component k at timestep t (a = alpha_bar_t, C_k = a Sigma_k + (1-a)I):
///   gain      B_k = sqrt(a) Sigma_k C_k^{-1}
///   cond mean e_k(x) = mu_k + B_k (x - sqrt(a) mu_k)   [= E[x0 | x_t, k]]
///   cond var  V_k = Sigma_k - a Sigma_k C_k^{-1} Sigma_k
///   obs var   S_k = A V_k A^T + sigma^2 I
class ExactScoreOracle {
 public:
  ExactScoreOracle(Gmm prior, NoiseSchedule sched, MeasurementModel model);

  const Gmm& prior() const { return prior_; }
  const NoiseSchedule& schedule() const { return sched_; }
  const MeasurementModel& model() const { return model_; }
  const Matrix& dense_operator() const { return a_dense_; }

  /// Gradient of log p(y | x_t).
  Vector likelihood_score(const Vector& y, const Vector& x_t, int t) const;

  /// log p(y | x_t) itself (the quantity finite-difference oracles probe).
  double log_likelihood(const Vector& y, const Vector& x_t, int t) const;

  /// prior_score + likelihood_score (the exact posterior score).
  Vector posterior_score(const Vector& y, const Vector& x_t, int t) const;

  Vector prior_score_at(const Vector& x_t, int t) const;

  /// E[x0 | x_t] via per-component responsibilities (independent route
  /// against tweedie_denoise).
  Vector conditional_mean(const Vector& x_t, int t) const;

  /// Average conditional variance tr(V_k)/dim for single-component priors.
  double scalar_conditional_variance(int t) const;

 private:
  struct PerT {
    Gmm diffused;
    std::vector<Matrix> gain;                    // B_k
    std::vector<Matrix> cond_var;                // V_k
    std::vector<Eigen::LLT<Matrix>> obs_llt;     // chol(S_k)
    std::vector<double> obs_log_det;
    PerT(Gmm d) : diffused(std::move(d)) {}
  };

  const PerT& per_t(int t) const;

  Gmm prior_;
  NoiseSchedule sched_;
  MeasurementModel model_;
  Matrix a_dense_;
  mutable std::mutex mu_;
  mutable std::map<int, std::shared_ptr<const PerT>> cache_;
};

}  // namespace saiplab
