#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "saiplab/gmm.hpp"
#include "saiplab/linalg.hpp"
#include "saiplab/operators.hpp"
#include "saiplab/schedule.hpp"

namespace saiplab {

enum class GuidanceKind { dps, dmps, pigdm, exact };
enum class PigdmR2Mode { heuristic, exact_gaussian };

struct GuidanceMethod {
  GuidanceKind kind = GuidanceKind::dps;
  /// zeta for dps, the constant scale for the other kinds; must be > 0.
  double scale_param = 1.0;
  PigdmR2Mode pigdm_r2_mode = PigdmR2Mode::heuristic;
  /// dps only: use effective_scale = scale_param instead of the
  /// residual-normalized scale_param / |y - A x0_hat|.
  bool dps_constant_scale = false;

  void validate() const;
};

struct GuidanceOutput {
  /// The method's estimate of the gradient of log p(y | x_t), unscaled.
  Vector likelihood_score;
  /// The scale actually applied to it this step.
  double effective_scale = 1.0;
};

/// Source of prior scores and Hessian-vector products of log p(x_t).
/// The analytic mixture implementation is exact; the plug variant wraps an
/// external score function and falls back to central differences for the
/// Hessian products so a learned model can be wired in without touching
/// the guidance code.
class PriorScoreSource {
 public:
  virtual ~PriorScoreSource() = default;
  virtual Vector score(const Vector& x, int t) const = 0;
  virtual Vector hessian_matvec(const Vector& x, int t, const Vector& v) const = 0;
};

class GmmScoreSource final : public PriorScoreSource {
 public:
  GmmScoreSource(Gmm prior, NoiseSchedule sched);
  Vector score(const Vector& x, int t) const override;
  Vector hessian_matvec(const Vector& x, int t, const Vector& v) const override;
  const Gmm& diffused(int t) const;
  const Gmm& prior() const { return prior_; }

 private:
  Gmm prior_;
  NoiseSchedule sched_;
  mutable std::mutex mu_;
  mutable std::map<int, std::shared_ptr<const Gmm>> cache_;
};

using ScoreFn = std::function<Vector(const Vector&, int)>;

class ExternalScoreSource final : public PriorScoreSource {
 public:
  explicit ExternalScoreSource(ScoreFn fn, double fd_step = 1e-4);
  Vector score(const Vector& x, int t) const override;
  Vector hessian_matvec(const Vector& x, int t, const Vector& v) const override;

 private:
  ScoreFn fn_;
  double h_;
};

/// Evaluates one guidance method for a fixed problem instance. The engine is
/// immutable after construction and safe to share across parallel chains;
/// Gram-system factors are cached per timestep under a mutex.
class GuidanceEngine {
 public:
  GuidanceEngine(GuidanceMethod method, MeasurementModel model, NoiseSchedule sched,
                 std::shared_ptr<const PriorScoreSource> prior_source,
                 std::shared_ptr<const ExactScoreOracle> oracle = nullptr);

  /// `prior_score` is the caller's already-computed score at state.x
  /// (the sampler evaluates it once per step and shares it).
  GuidanceOutput estimate(const Vector& y, const DiffusionState& state, const Vector& prior_score) const;

  const GuidanceMethod& method() const { return method_; }

 private:
  Vector solve_gram(double coeff, const Vector& r, int t) const;
  Vector jacobian_matvec(const Vector& x, int t, const Vector& v) const;

  GuidanceMethod method_;
  MeasurementModel model_;
  NoiseSchedule sched_;
  std::shared_ptr<const PriorScoreSource> prior_source_;
  std::shared_ptr<const ExactScoreOracle> oracle_;
  Matrix gram_;  // A A^T, dense fallback only
  bool gram_identity_;
  mutable std::mutex mu_;
  mutable std::map<int, std::shared_ptr<const Eigen::LLT<Matrix>>> gram_cache_;
};

/// One-call form for a mixture prior: builds the analytic score source (and
/// the exact oracle when required) on the fly.
GuidanceOutput estimate_likelihood_score(const GuidanceMethod& method, const Gmm& prior, const NoiseSchedule& sched,
                                         const MeasurementModel& model, const Vector& y, const DiffusionState& state);

/// Relative error |estimate - exact| / (|exact| + 1e-12) of a method's
/// likelihood score against the exact oracle at one state.
double approximation_error(const GuidanceMethod& method, const Gmm& prior, const NoiseSchedule& sched,
                           const MeasurementModel& model, const Vector& y, const DiffusionState& state);

const char* to_string(GuidanceKind k);
GuidanceKind guidance_kind_from_string(const std::string& s);
const char* to_string(PigdmR2Mode m);
PigdmR2Mode pigdm_r2_from_string(const std::string& s);

}  // namespace saiplab
