#pragma once

#include <Eigen/Core>

namespace saiplab {

/// Flat real-valued signal with row-major image shape metadata.
/// Pure vectors use width == 1.
struct Signal {
  Eigen::VectorXd data;
  int height = 0;
  int width = 1;

  Signal() = default;

  static Signal vector(Eigen::VectorXd v);
  static Signal image(Eigen::VectorXd v, int height, int width);

  int size() const { return static_cast<int>(data.size()); }

  double& at(int row, int col) { return data[row * width + col]; }
  double at(int row, int col) const { return data[row * width + col]; }

  /// True when every entry is finite (no NaN/Inf).
  bool all_finite() const { return data.allFinite(); }
};

/// Throws ContractViolation when the signal contains NaN/Inf.
void ensure_finite(const Signal& s, const char* context);
void ensure_finite(const Eigen::VectorXd& v, const char* context);

}  // namespace saiplab
