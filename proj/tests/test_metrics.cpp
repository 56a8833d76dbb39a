#include <cmath>

#include <doctest.h>

#include "saiplab/errors.hpp"
#include "saiplab/metrics.hpp"
#include "saiplab/rng.hpp"

using namespace saiplab;

namespace {

Signal random_image(Rng& rng, int h, int w) {
  Vector v(h * w);
  for (int i = 0; i < v.size(); ++i) v[i] = rng.uniform01();
  return Signal::image(std::move(v), h, w);
}

}  // namespace

TEST_CASE("psnr: cap, direct formula, independent MSE oracle, symmetry") {
  Rng rng(1);
  const Signal img = random_image(rng, 16, 16);
  CHECK(psnr(img, img) == 99.0);

  // Uniform error of 0.1 gives MSE 0.01 -> 20 dB at peak 1.
  Signal shifted = img;
  shifted.data.array() += 0.1;
  CHECK(psnr(img, shifted) == doctest::Approx(20.0).epsilon(1e-12));

  const Signal other = random_image(rng, 16, 16);
  double mse = 0.0;  // two-pass oracle
  for (int i = 0; i < img.size(); ++i) {
    const double d = img.data[i] - other.data[i];
    mse += d * d;
  }
  mse /= img.size();
  CHECK(psnr(img, other) == doctest::Approx(10.0 * std::log10(1.0 / mse)).epsilon(1e-10));
  CHECK(psnr(img, other) == psnr(other, img));

  Signal wrong = random_image(rng, 8, 8);
  CHECK_THROWS_AS(psnr(img, wrong), ContractViolation);
}

TEST_CASE("ssim: identity, anticorrelation, literal-formula oracle") {
  Rng rng(2);
  const Signal img = random_image(rng, 16, 16);
  CHECK(ssim(img, img) == doctest::Approx(1.0).epsilon(1e-12));

  // Zero-mean +-v patterns against their negation: perfect anticorrelation.
  // With the standard stabilizing constants the value is -1 + O(C2/var).
  Vector pattern(8 * 8);
  for (int i = 0; i < 64; ++i) pattern[i] = (i % 2 == 0) ? 1.0 : -1.0;
  const Signal a = Signal::image(pattern, 8, 8);
  const Signal b = Signal::image((-pattern).eval(), 8, 8);
  CHECK(ssim(a, b) == doctest::Approx(-1.0).epsilon(1e-3));

  // Literal windowed-formula oracle on a random pair.
  const Signal x = random_image(rng, 16, 16);
  const Signal y = random_image(rng, 16, 16);
  const double c1 = 1e-4, c2 = 9e-4;
  double total = 0.0;
  for (int bi = 0; bi < 2; ++bi)
    for (int bj = 0; bj < 2; ++bj) {
      double mx = 0, my = 0, vx = 0, vy = 0, cxy = 0;
      for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) {
          mx += x.at(bi * 8 + i, bj * 8 + j);
          my += y.at(bi * 8 + i, bj * 8 + j);
        }
      mx /= 64;
      my /= 64;
      for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) {
          const double dx = x.at(bi * 8 + i, bj * 8 + j) - mx;
          const double dy = y.at(bi * 8 + i, bj * 8 + j) - my;
          vx += dx * dx;
          vy += dy * dy;
          cxy += dx * dy;
        }
      vx /= 64;
      vy /= 64;
      cxy /= 64;
      total += (2 * mx * my + c1) * (2 * cxy + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
    }
  CHECK(ssim(x, y) == doctest::Approx(total / 4).epsilon(1e-10));

  CHECK_THROWS_AS(ssim(Signal::image(Vector::Zero(16), 4, 4), Signal::image(Vector::Zero(16), 4, 4)),
                  ContractViolation);
}

TEST_CASE("wasserstein-1 in 1-D: identity, point masses, translated Gaussians") {
  CHECK(wasserstein1_1d({1, 2, 3}, {1, 2, 3}) == doctest::Approx(0.0));
  CHECK(wasserstein1_1d({0.0}, {1.0}) == doctest::Approx(1.0));
  // Unequal sample counts: {0} vs {-1, 1} has W1 = 1.
  CHECK(wasserstein1_1d({0.0}, {-1.0, 1.0}) == doctest::Approx(1.0));

  // Translated Gaussian: W1(N(0,1), N(m,1)) = |m|.
  Rng rng(3);
  const double m = 0.7;
  std::vector<double> a(10000), b(10000);
  for (auto& v : a) v = rng.normal();
  for (auto& v : b) v = m + rng.normal();
  CHECK(wasserstein1_1d(a, b) == doctest::Approx(m).epsilon(0.07));
}

TEST_CASE("sliced wasserstein: zero self-distance, 1-D point masses, triangle inequality") {
  Rng rng(4);
  std::vector<Vector> a, b, c;
  for (int i = 0; i < 200; ++i) {
    a.push_back(rng.standard_normal(3));
    b.push_back(rng.standard_normal(3) * 1.5);
    c.push_back(rng.standard_normal(3) + Vector::Constant(3, 0.5));
  }
  Rng p1(100);
  CHECK(sliced_wasserstein(a, a, 64, p1) == doctest::Approx(0.0));

  std::vector<Vector> za{Vector::Zero(1)}, zb{Vector::Ones(1)};
  Rng p2(100);
  CHECK(sliced_wasserstein(za, zb, 16, p2) == doctest::Approx(1.0).epsilon(1e-12));

  // Triangle inequality with shared projection seeds.
  Rng pa(5), pb(5), pc(5);
  const double ab = sliced_wasserstein(a, b, 128, pa);
  const double bc = sliced_wasserstein(b, c, 128, pb);
  const double ac = sliced_wasserstein(a, c, 128, pc);
  CHECK(ac <= ab + bc + 0.02);

  CHECK_THROWS_AS(sliced_wasserstein({}, za, 8, p2), ContractViolation);
}
