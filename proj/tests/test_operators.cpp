#include <doctest.h>

#include "saiplab/errors.hpp"
#include "saiplab/operators.hpp"
#include "saiplab/rng.hpp"

using namespace saiplab;

namespace {

// <A x, u> == <x, A^T u> on random pairs.
void check_adjoint(const LinearOperator& op, Rng& rng, int pairs = 100) {
  for (int i = 0; i < pairs; ++i) {
    const Vector x = rng.standard_normal(op.in_dim());
    const Vector u = rng.standard_normal(op.out_dim());
    const double lhs = op.apply(x).dot(u);
    const double rhs = x.dot(op.adjoint(u));
    CHECK(std::abs(lhs - rhs) <= 1e-10 * (std::abs(lhs) + std::abs(rhs) + 1.0));
  }
}

}  // namespace

TEST_CASE("identity operator") {
  IdentityOperator op(5);
  Rng rng(3);
  const Vector x = rng.standard_normal(5);
  CHECK((op.apply(x) - x).cwiseAbs().maxCoeff() == 0.0);
  CHECK((op.adjoint(x) - x).cwiseAbs().maxCoeff() == 0.0);
  check_adjoint(op, rng);
  CHECK((dense_materialize(op) - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mask operator: selection, scatter adjoint, dense form") {
  MaskOperator op(3, {0, 2});
  Vector x(3);
  x << 5, 6, 7;
  const Vector y = op.apply(x);
  CHECK(y.size() == 2);
  CHECK(y[0] == 5.0);
  CHECK(y[1] == 7.0);

  Vector u(2);
  u << 5, 7;
  const Vector back = op.adjoint(u);
  CHECK(back[0] == 5.0);
  CHECK(back[1] == 0.0);
  CHECK(back[2] == 7.0);

  Matrix expect(2, 3);
  expect << 1, 0, 0, 0, 0, 1;
  CHECK((dense_materialize(op) - expect).cwiseAbs().maxCoeff() == 0.0);

  Rng rng(4);
  check_adjoint(op, rng);

  CHECK_THROWS_AS(MaskOperator(3, {0, 0}), ContractViolation);
  CHECK_THROWS_AS(MaskOperator(3, {3}), ContractViolation);
  CHECK_THROWS_AS(op.apply(u), ContractViolation);
}

TEST_CASE("uniform blur: constant preservation, symmetry, double stochasticity") {
  const int h = 12, w = 16, k = 3;
  UniformBlurOperator op(h, w, k);
  const Vector constant = Vector::Constant(h * w, 0.37);
  CHECK((op.apply(constant) - constant).cwiseAbs().maxCoeff() < 1e-14);

  Rng rng(9);
  check_adjoint(op, rng);

  // Symmetric kernel + circular boundary means A^T = A.
  const Vector x = rng.standard_normal(h * w);
  CHECK((op.apply(x) - op.adjoint(x)).cwiseAbs().maxCoeff() == 0.0);

  const Matrix a = dense_materialize(op);
  for (int j = 0; j < a.cols(); ++j) CHECK(a.col(j).sum() == doctest::Approx(1.0).epsilon(1e-12));
  for (int i = 0; i < a.rows(); ++i) CHECK(a.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(UniformBlurOperator(8, 8, 4), ContractViolation);   // even kernel
  CHECK_THROWS_AS(UniformBlurOperator(4, 4, 5), ContractViolation);   // kernel > image
}

TEST_CASE("dense materialization agrees with matrix-free application") {
  Rng rng(21);
  const int h = 8, w = 8;
  std::vector<std::shared_ptr<LinearOperator>> ops;
  ops.push_back(std::make_shared<IdentityOperator>(h * w));
  ops.push_back(std::make_shared<UniformBlurOperator>(h, w, 3));
  MaskSpec random_mask;
  random_mask.missing_fraction = 0.8;
  ops.push_back(random_mask.build(h, w, 77));
  for (const auto& op : ops) {
    const Matrix a = dense_materialize(*op);
    for (int rep = 0; rep < 20; ++rep) {
      const Vector x = rng.standard_normal(op->in_dim());
      CHECK((a * x - op->apply(x)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("dense materialization respects the entry limit") {
  IdentityOperator big(200);
  CHECK_THROWS_AS(dense_materialize(big, 100), ResourceLimitError);
}

TEST_CASE("mask specs: reproducible random masks, box bounds") {
  MaskSpec spec;
  spec.missing_fraction = 0.9;
  const auto m1 = spec.build(16, 16, 1234);
  const auto m2 = spec.build(16, 16, 1234);
  CHECK(m1->kept_indices() == m2->kept_indices());
  CHECK(m1->out_dim() == 16 * 16 - 230);  // keep = 256 - round(0.9*256)
  const auto m3 = spec.build(16, 16, 1235);
  CHECK(m1->kept_indices() != m3->kept_indices());

  MaskSpec box;
  box.mode = MaskSpec::Mode::box;
  box.box = {4, 4, 8, 8};
  const auto mb = box.build(16, 16, 0);
  CHECK(mb->out_dim() == 256 - 64);
  for (int idx : mb->kept_indices()) {
    const int i = idx / 16, j = idx % 16;
    CHECK((i < 4 || i >= 12 || j < 4 || j >= 12));
  }
  box.box = {10, 10, 8, 8};
  CHECK_THROWS_AS(box.build(16, 16, 0), ContractViolation);
}

TEST_CASE("measure: noiseless exactness and empirical noise level") {
  Rng rng(31);
  const int n = 64;
  MeasurementModel noiseless{std::make_shared<IdentityOperator>(n), 0.0};
  const Vector x = rng.standard_normal(n);
  Rng mrng(1);
  CHECK((noiseless.measure(x, mrng) - x).cwiseAbs().maxCoeff() == 0.0);

  // sigma = 0.5 denoising convention: y = x + 0.5 eps.
  MeasurementModel denoise{std::make_shared<IdentityOperator>(n), 0.5};
  Rng d1(7), d2(7);
  const Vector y = denoise.measure(x, d1);
  const Vector eps = d2.standard_normal(n);
  CHECK((y - (x + 0.5 * eps)).cwiseAbs().maxCoeff() == 0.0);

  // Empirical std of y - Ax over 1e5 pixels at sigma = 0.05.
  const int big = 100000;
  MeasurementModel mild{std::make_shared<IdentityOperator>(big), 0.05};
  Rng brng(99);
  const Vector zeros = Vector::Zero(big);
  const Vector noise = mild.measure(zeros, brng);
  const double std_hat = std::sqrt(noise.squaredNorm() / big);
  CHECK(std::abs(std_hat - 0.05) < 0.002);
}
