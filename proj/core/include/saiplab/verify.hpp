#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "saiplab/gmm.hpp"

namespace saiplab {

struct CheckResult {
  std::string name;
  bool pass = false;
  double observed = 0.0;   // worst value seen
  double tolerance = 0.0;
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 20250815;
  int score_fd_points = 50;
  int quadrature_points = 50;
  int saip_triples = 1000;
  int posterior_grid = 200;
  int pigdm_points = 20;
  /// Fault injection for self-tests: added to the computed s before the
  /// stationarity/orthogonality/optimality checks.
  double saip_s_perturbation = 0.0;
};

/// Independent-oracle checks of the analytic machinery:
///  - prior/likelihood/posterior scores against finite differences of
///    log densities (the likelihood/posterior log densities evaluated by
///    2-D quadrature over primitive Gaussians),
///  - the exact posterior against a grid-normalized brute-force density,
///  - the adaptive scale's stationarity / orthogonal-projection /
///    grid-optimality properties,
///  - Gaussian-exactness of the pseudoinverse guidance in its exact-r2 mode.
/// Each check appears exactly once in the report.
std::vector<CheckResult> run_verification(const VerifyOptions& opt = {});

/// Finite-difference gradient of the diffused-mixture log density (helper
/// exposed for tests; h is the central-difference step).
Vector fd_prior_score(const Gmm& prior, const NoiseSchedule& sched, const Vector& x, int t, double h = 1e-5);

/// Finite-difference gradient of log p(y | x_t) where the log likelihood is
/// evaluated by adaptive tensor-grid quadrature over x0 (independent of the
/// closed-form conditional algebra).
Vector fd_quadrature_likelihood_score(const Gmm& prior, const NoiseSchedule& sched, const MeasurementModel& model,
                                      const Vector& y, const Vector& x, int t, double h = 1e-5,
                                      int grid_per_dim = 400);

}  // namespace saiplab
