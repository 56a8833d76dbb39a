#include "saiplab/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "saiplab/errors.hpp"

namespace saiplab {

double psnr(const Signal& reference, const Signal& estimate, double peak) {
  if (reference.height != estimate.height || reference.width != estimate.width)
    throw ContractViolation("psnr: shape mismatch");
  if (!(peak > 0.0)) throw ContractViolation("psnr: peak must be positive");
  const double mse = (reference.data - estimate.data).squaredNorm() / reference.size();
  if (mse == 0.0) return 99.0;
  return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const Signal& reference, const Signal& estimate, double peak) {
  if (reference.height != estimate.height || reference.width != estimate.width)
    throw ContractViolation("ssim: shape mismatch");
  constexpr int kWin = 8;
  if (reference.height < kWin || reference.width < kWin)
    throw ContractViolation("ssim: image must be at least 8x8");
  const double c1 = (0.01 * peak) * (0.01 * peak);
  const double c2 = (0.03 * peak) * (0.03 * peak);
  const int rows = reference.height / kWin;
  const int cols = reference.width / kWin;
  double total = 0.0;
  for (int bi = 0; bi < rows; ++bi) {
    for (int bj = 0; bj < cols; ++bj) {
      double mx = 0, my = 0;
      for (int i = 0; i < kWin; ++i)
        for (int j = 0; j < kWin; ++j) {
          mx += reference.at(bi * kWin + i, bj * kWin + j);
          my += estimate.at(bi * kWin + i, bj * kWin + j);
        }
      const int n = kWin * kWin;
      mx /= n;
      my /= n;
      double vx = 0, vy = 0, cxy = 0;
      for (int i = 0; i < kWin; ++i)
        for (int j = 0; j < kWin; ++j) {
          const double dx = reference.at(bi * kWin + i, bj * kWin + j) - mx;
          const double dy = estimate.at(bi * kWin + i, bj * kWin + j) - my;
          vx += dx * dx;
          vy += dy * dy;
          cxy += dx * dy;
        }
      vx /= n;
      vy /= n;
      cxy /= n;
      total += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
    }
  }
  return total / (rows * cols);
}

double wasserstein1_1d(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ContractViolation("wasserstein1_1d: empty sample set");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const size_t n = a.size(), m = b.size();
  size_t i = 0, j = 0;
  double prev = 0.0, total = 0.0;
  while (i < n && j < m) {
    const double ua = static_cast<double>(i + 1) / n;
    const double ub = static_cast<double>(j + 1) / m;
    const double u = std::min(ua, ub);
    total += (u - prev) * std::abs(a[i] - b[j]);
    prev = u;
    if (ua <= u) ++i;
    if (ub <= u) ++j;
  }
  return total;
}

double sliced_wasserstein(const std::vector<Vector>& a, const std::vector<Vector>& b, int projections, Rng& rng) {
  if (a.empty() || b.empty()) throw ContractViolation("sliced_wasserstein: empty sample set");
  if (projections < 1) throw ContractViolation("sliced_wasserstein: projections must be >= 1");
  const int dim = static_cast<int>(a.front().size());
  for (const auto& v : b)
    if (v.size() != dim) throw ContractViolation("sliced_wasserstein: dimension mismatch");
  double total = 0.0;
  std::vector<double> pa(a.size()), pb(b.size());
  for (int p = 0; p < projections; ++p) {
    Vector dir = rng.standard_normal(dim);
    const double norm = dir.norm();
    if (norm == 0.0) {
      --p;  // essentially impossible, but keep the direction well defined
      continue;
    }
    dir /= norm;
    for (size_t i = 0; i < a.size(); ++i) pa[i] = a[i].dot(dir);
    for (size_t i = 0; i < b.size(); ++i) pb[i] = b[i].dot(dir);
    total += wasserstein1_1d(pa, pb);
  }
  return total / projections;
}

}  // namespace saiplab
