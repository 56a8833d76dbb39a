#include "saiplab/linalg.hpp"

#include <cmath>

#include "saiplab/errors.hpp"

namespace saiplab {

Matrix cholesky_lower(const Matrix& m) {
  if (m.rows() != m.cols()) throw ContractViolation("cholesky: matrix must be square");
  const double scale = m.cwiseAbs().maxCoeff();
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1.0))
    throw ContractViolation("cholesky: matrix must be symmetric");
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("cholesky: matrix is not positive definite");
  return llt.matrixL();
}

Covariance Covariance::isotropic(int dim, double var) {
  if (dim <= 0) throw ContractViolation("Covariance::isotropic: dim must be positive");
  if (!(var > 0.0) || !std::isfinite(var))
    throw NotPositiveDefinite("Covariance::isotropic: variance must be positive");
  Covariance c;
  c.iso_ = true;
  c.dim_ = dim;
  c.iso_var_ = var;
  c.log_det_ = dim * std::log(var);
  return c;
}

Covariance Covariance::dense(Matrix m) {
  if (m.rows() != m.cols()) throw ContractViolation("Covariance::dense: matrix must be square");
  const double scale = std::max(m.cwiseAbs().maxCoeff(), 1.0);
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw ContractViolation("Covariance::dense: matrix must be symmetric");
  auto llt = std::make_shared<Eigen::LLT<Matrix>>(m);
  if (llt->info() != Eigen::Success)
    throw NotPositiveDefinite("Covariance::dense: matrix is not positive definite");
  Covariance c;
  c.iso_ = false;
  c.dim_ = static_cast<int>(m.rows());
  c.mat_ = std::move(m);
  c.log_det_ = 2.0 * Matrix(llt->matrixL()).diagonal().array().log().sum();
  c.llt_ = std::move(llt);
  return c;
}

double Covariance::iso_value() const {
  if (!iso_) throw ContractViolation("Covariance::iso_value: covariance is dense");
  return iso_var_;
}

Vector Covariance::matvec(const Vector& v) const {
  if (v.size() != dim_) throw ContractViolation("Covariance::matvec: dimension mismatch");
  return iso_ ? Vector(iso_var_ * v) : Vector(mat_ * v);
}

Vector Covariance::solve(const Vector& v) const {
  if (v.size() != dim_) throw ContractViolation("Covariance::solve: dimension mismatch");
  return iso_ ? Vector(v / iso_var_) : Vector(llt_->solve(v));
}

Matrix Covariance::solve_matrix(const Matrix& m) const {
  if (m.rows() != dim_) throw ContractViolation("Covariance::solve_matrix: dimension mismatch");
  return iso_ ? Matrix(m / iso_var_) : Matrix(llt_->solve(m));
}

double Covariance::log_det() const { return log_det_; }

Vector Covariance::chol_mul(const Vector& z) const {
  if (z.size() != dim_) throw ContractViolation("Covariance::chol_mul: dimension mismatch");
  return iso_ ? Vector(std::sqrt(iso_var_) * z) : Vector(llt_->matrixL() * z);
}

Matrix Covariance::to_dense() const {
  if (iso_) return iso_var_ * Matrix::Identity(dim_, dim_);
  return mat_;
}

Covariance Covariance::scaled_plus_identity(double a, double b) const {
  if (iso_) return isotropic(dim_, a * iso_var_ + b);
  return dense(a * mat_ + b * Matrix::Identity(dim_, dim_));
}

double Covariance::trace() const { return iso_ ? iso_var_ * dim_ : mat_.trace(); }

}  // namespace saiplab
