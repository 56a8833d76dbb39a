#include "saiplab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "saiplab/errors.hpp"

namespace saiplab {

void LinearOperator::check_in(const Vector& x) const {
  if (x.size() != in_dim()) throw ContractViolation("operator apply: input dimension mismatch");
}

void LinearOperator::check_out(const Vector& u) const {
  if (u.size() != out_dim()) throw ContractViolation("operator adjoint: input dimension mismatch");
}

Matrix dense_materialize(const LinearOperator& op, std::int64_t max_entries) {
  const std::int64_t entries = std::int64_t(op.in_dim()) * op.out_dim();
  if (entries > max_entries)
    throw ResourceLimitError("dense_materialize: operator exceeds the dense entry limit");
  Matrix a(op.out_dim(), op.in_dim());
  Vector basis = Vector::Zero(op.in_dim());
  for (int j = 0; j < op.in_dim(); ++j) {
    basis[j] = 1.0;
    a.col(j) = op.apply(basis);
    basis[j] = 0.0;
  }
  return a;
}

IdentityOperator::IdentityOperator(int n) : n_(n) {
  if (n <= 0) throw ContractViolation("IdentityOperator: dimension must be positive");
}

Vector IdentityOperator::apply(const Vector& x) const {
  check_in(x);
  return x;
}

Vector IdentityOperator::adjoint(const Vector& u) const {
  check_out(u);
  return u;
}

MaskOperator::MaskOperator(int n, std::vector<int> kept_indices) : n_(n), kept_(std::move(kept_indices)) {
  if (n <= 0) throw ContractViolation("MaskOperator: dimension must be positive");
  if (kept_.empty()) throw ContractViolation("MaskOperator: at least one kept index required");
  std::sort(kept_.begin(), kept_.end());
  if (std::adjacent_find(kept_.begin(), kept_.end()) != kept_.end())
    throw ContractViolation("MaskOperator: kept indices must be unique");
  if (kept_.front() < 0 || kept_.back() >= n)
    throw ContractViolation("MaskOperator: kept index out of bounds");
}

Vector MaskOperator::apply(const Vector& x) const {
  check_in(x);
  Vector out(out_dim());
  for (size_t i = 0; i < kept_.size(); ++i) out[static_cast<int>(i)] = x[kept_[i]];
  return out;
}

Vector MaskOperator::adjoint(const Vector& u) const {
  check_out(u);
  Vector out = Vector::Zero(n_);
  for (size_t i = 0; i < kept_.size(); ++i) out[kept_[i]] = u[static_cast<int>(i)];
  return out;
}

UniformBlurOperator::UniformBlurOperator(int height, int width, int kernel_size)
    : height_(height), width_(width), kernel_(kernel_size) {
  if (height <= 0 || width <= 0) throw ContractViolation("UniformBlurOperator: bad image shape");
  if (kernel_size <= 0 || kernel_size % 2 == 0)
    throw ContractViolation("UniformBlurOperator: kernel size must be odd and positive");
  if (kernel_size > height || kernel_size > width)
    throw ContractViolation("UniformBlurOperator: kernel larger than image");
}

Vector UniformBlurOperator::apply(const Vector& x) const {
  check_in(x);
  const int r = kernel_ / 2;
  const double inv = 1.0 / (kernel_ * kernel_);
  // Separable kernel: average rows, then columns, with periodic wrap.
  Vector rows(height_ * width_);
  for (int i = 0; i < height_; ++i) {
    for (int j = 0; j < width_; ++j) {
      double acc = 0.0;
      for (int dj = -r; dj <= r; ++dj) {
        int jj = j + dj;
        if (jj < 0) jj += width_;
        if (jj >= width_) jj -= width_;
        acc += x[i * width_ + jj];
      }
      rows[i * width_ + j] = acc;
    }
  }
  Vector out(height_ * width_);
  for (int j = 0; j < width_; ++j) {
    for (int i = 0; i < height_; ++i) {
      double acc = 0.0;
      for (int di = -r; di <= r; ++di) {
        int ii = i + di;
        if (ii < 0) ii += height_;
        if (ii >= height_) ii -= height_;
        acc += rows[ii * width_ + j];
      }
      out[i * width_ + j] = acc * inv;
    }
  }
  return out;
}

Vector UniformBlurOperator::adjoint(const Vector& u) const {
  // The kernel is symmetric and the convolution circular, so A^T = A.
  check_out(u);
  return apply(u);
}

std::shared_ptr<MaskOperator> MaskSpec::build(int height, int width, std::uint64_t seed) const {
  const int n = height * width;
  if (mode == Mode::box) {
    const auto [top, left, box_h, box_w] = box;
    if (top < 0 || left < 0 || box_h <= 0 || box_w <= 0 || top + box_h > height || left + box_w > width)
      throw ContractViolation("MaskSpec: box outside image bounds");
    std::vector<int> kept;
    kept.reserve(n - box_h * box_w);
    for (int i = 0; i < height; ++i)
      for (int j = 0; j < width; ++j)
        if (i < top || i >= top + box_h || j < left || j >= left + box_w) kept.push_back(i * width + j);
    return std::make_shared<MaskOperator>(n, std::move(kept));
  }
  if (missing_fraction < 0.0 || missing_fraction > 1.0)
    throw ContractViolation("MaskSpec: missing_fraction must be in [0, 1]");
  int keep = n - static_cast<int>(std::lround(missing_fraction * n));
  keep = std::max(keep, 1);  // a fully-missing mask has no measurement space
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_index(i + 1)]);
  perm.resize(keep);
  return std::make_shared<MaskOperator>(n, std::move(perm));
}

Vector MeasurementModel::measure(const Vector& x, Rng& rng) const {
  if (noise_std < 0.0) throw ContractViolation("measure: noise_std must be >= 0");
  Vector y = op->apply(x);
  if (noise_std > 0.0) y += noise_std * rng.standard_normal(static_cast<int>(y.size()));
  ensure_finite(y, "measure");
  return y;
}

}  // namespace saiplab
