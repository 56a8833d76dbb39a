#pragma once

#include <memory>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace saiplab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Lower-triangular L with L*L^T == m. Requires a symmetric input and
/// throws NotPositiveDefinite when the factorization fails.
Matrix cholesky_lower(const Matrix& m);

/// Symmetric positive definite covariance with a representation-aware
/// fast path: isotropic covariances keep all algebra O(n), dense ones are
/// factorized once at construction.
class Covariance {
 public:
  /// var * I in `dim` dimensions (var > 0).
  static Covariance isotropic(int dim, double var);

  /// Arbitrary SPD matrix; validated by Cholesky at construction.
  static Covariance dense(Matrix m);

  int dim() const { return dim_; }
  bool is_isotropic() const { return iso_; }

  /// Isotropic variance; contract violation for dense covariances.
  double iso_value() const;

  Vector matvec(const Vector& v) const;
  Vector solve(const Vector& v) const;
  Matrix solve_matrix(const Matrix& m) const;
  double log_det() const;

  /// L * z where L is the lower Cholesky factor (used for sampling).
  Vector chol_mul(const Vector& z) const;

  Matrix to_dense() const;

  /// a * Sigma + b * I, preserving the isotropic representation.
  Covariance scaled_plus_identity(double a, double b) const;

  double trace() const;

 private:
  Covariance() = default;
  bool iso_ = true;
  int dim_ = 0;
  double iso_var_ = 1.0;
  Matrix mat_;
  std::shared_ptr<const Eigen::LLT<Matrix>> llt_;  // dense only
  double log_det_ = 0.0;
};

}  // namespace saiplab
