#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "saiplab/linalg.hpp"
#include "saiplab/rng.hpp"
#include "saiplab/signal.hpp"

namespace saiplab {

/// Matrix-free linear measurement operator A : R^N -> R^M.
class LinearOperator {
 public:
  enum class Kind { identity, mask, uniform_blur };

  virtual ~LinearOperator() = default;

  virtual int in_dim() const = 0;
  virtual int out_dim() const = 0;
  virtual Kind kind() const = 0;

  /// A x.
  virtual Vector apply(const Vector& x) const = 0;
  /// A^T u.
  virtual Vector adjoint(const Vector& u) const = 0;

  /// True when A A^T is exactly the M x M identity (identity and mask
  /// operators). Lets Gram-system solves skip the dense path.
  virtual bool gram_is_identity() const { return false; }

 protected:
  void check_in(const Vector& x) const;
  void check_out(const Vector& u) const;
};

/// Default cap on in_dim * out_dim for explicit materialization.
inline constexpr std::int64_t kDenseEntryLimit = std::int64_t(4096) * 4096;

/// Explicit M x N matrix for A; columnwise agreement with apply() is part of
/// the contract. Throws ResourceLimitError above `max_entries`.
Matrix dense_materialize(const LinearOperator& op, std::int64_t max_entries = kDenseEntryLimit);

class IdentityOperator final : public LinearOperator {
 public:
  explicit IdentityOperator(int n);
  int in_dim() const override { return n_; }
  int out_dim() const override { return n_; }
  Kind kind() const override { return Kind::identity; }
  Vector apply(const Vector& x) const override;
  Vector adjoint(const Vector& u) const override;
  bool gram_is_identity() const override { return true; }

 private:
  int n_;
};

/// Keeps the listed coordinates (sorted, unique); the adjoint scatters
/// values back and zero-fills the missing ones.
class MaskOperator final : public LinearOperator {
 public:
  MaskOperator(int n, std::vector<int> kept_indices);
  int in_dim() const override { return n_; }
  int out_dim() const override { return static_cast<int>(kept_.size()); }
  Kind kind() const override { return Kind::mask; }
  Vector apply(const Vector& x) const override;
  Vector adjoint(const Vector& u) const override;
  bool gram_is_identity() const override { return true; }
  const std::vector<int>& kept_indices() const { return kept_; }

 private:
  int n_;
  std::vector<int> kept_;
};

/// k x k uniform blur via circular (periodic) convolution on an h x w
/// image; exactly linear, symmetric, and constant-preserving. The kernel
/// size must be odd and no larger than the image.
class UniformBlurOperator final : public LinearOperator {
 public:
  UniformBlurOperator(int height, int width, int kernel_size);
  int in_dim() const override { return height_ * width_; }
  int out_dim() const override { return height_ * width_; }
  Kind kind() const override { return Kind::uniform_blur; }
  Vector apply(const Vector& x) const override;
  Vector adjoint(const Vector& u) const override;
  int kernel_size() const { return kernel_; }

 private:
  int height_, width_, kernel_;
};

/// Mask construction spec. In random mode the mask is drawn once from the
/// task seed and then fixed for the task instance.
struct MaskSpec {
  enum class Mode { random, box };
  Mode mode = Mode::random;
  double missing_fraction = 0.9;           // random mode
  std::array<int, 4> box = {0, 0, 0, 0};   // box mode: top, left, height, width

  std::shared_ptr<MaskOperator> build(int height, int width, std::uint64_t seed) const;
};

/// y = A x + sigma * eps measurement process.
struct MeasurementModel {
  std::shared_ptr<const LinearOperator> op;
  double noise_std = 0.0;

  Vector measure(const Vector& x, Rng& rng) const;
};

}  // namespace saiplab
