#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "krgs/kernels.hpp"
#include "krgs/reference.hpp"
#include "testutil.hpp"

using namespace krgs;

TEST_CASE("gaussian gram over identical inputs is all ones") {
  const Matrix x = Matrix::Ones(5, 3) * 2.5;
  const Matrix k = kernel_matrix(KernelSpec::gaussian(1.7), x);
  CHECK(k == Matrix::Ones(5, 5));
}

TEST_CASE("gaussian gram has a unit diagonal and a frozen off-diagonal value") {
  Matrix x(2, 1);
  x << 0.0, 1.0;
  const Matrix k = kernel_matrix(KernelSpec::gaussian(1.0), x);
  CHECK(k(0, 0) == 1.0);
  CHECK(k(1, 1) == 1.0);
  // ||0 - 1||^2 / (2 * 1^2) = 0.5
  CHECK(k(0, 1) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  CHECK(k(0, 1) == k(1, 0));
}

TEST_CASE("gaussian gram is symmetric PSD with entries in (0, 1] on 120 cases") {
  Rng rng(301);
  for (int c = 0; c < 120; ++c) {
    const Index n = 2 + Index(rng.below(14));
    const Index d = 1 + Index(rng.below(6));
    const Matrix x = tu::random_matrix(rng, n, d);
    const double sigma = rng.uniform(0.3, 3.3);
    const Matrix k = kernel_matrix(KernelSpec::gaussian(sigma), x);
    CHECK((k - k.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(k.minCoeff() > 0.0);
    CHECK(k.maxCoeff() <= 1.0);
    CHECK(k.diagonal().isApproxToConstant(1.0, 1e-14));
    Eigen::SelfAdjointEigenSolver<Matrix> es(k);
    CHECK(es.eigenvalues().minCoeff() >= -1e-8 * std::max(1.0, k.norm()));
  }
}

TEST_CASE("gaussian kernel is translation invariant") {
  Rng rng(302);
  for (int c = 0; c < 40; ++c) {
    const Index n = 2 + Index(rng.below(9));
    const Index d = 1 + Index(rng.below(4));
    const Matrix x = tu::random_matrix(rng, n, d);
    const Matrix shift = Matrix::Ones(n, 1) * tu::random_matrix(rng, 1, d);
    const KernelSpec spec = KernelSpec::gaussian(1.3);
    const Matrix a = kernel_matrix(spec, x);
    const Matrix b = kernel_matrix(spec, x + shift);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("linear gram equals X X'") {
  Rng rng(303);
  for (int c = 0; c < 40; ++c) {
    const Index n = 1 + Index(rng.below(10));
    const Index d = 1 + Index(rng.below(5));
    const Matrix x = tu::random_matrix(rng, n, d);
    const Matrix k = kernel_matrix(KernelSpec::linear(), x);
    CHECK(tu::rel_diff(k, Matrix(x * x.transpose())) <= 1e-14);
  }
}

TEST_CASE("kernel_matrix agrees with the scalar reference") {
  Rng rng(304);
  for (int c = 0; c < 60; ++c) {
    const Index n = 2 + Index(rng.below(12));
    const Index d = 1 + Index(rng.below(5));
    const Matrix x = tu::random_matrix(rng, n, d);
    const KernelSpec spec = KernelSpec::gaussian(rng.uniform(0.4, 2.4));
    const Matrix fast = kernel_matrix(spec, x);
    const Matrix slow = ref::kernel_matrix(spec, x);
    CHECK(tu::rel_diff(fast, slow) <= 1e-12);
  }
}

TEST_CASE("kernel_vector at a training input reproduces the Gram column") {
  Rng rng(305);
  for (int c = 0; c < 30; ++c) {
    const Index n = 2 + Index(rng.below(9));
    const Index d = 1 + Index(rng.below(4));
    const Matrix x = tu::random_matrix(rng, n, d);
    const KernelSpec spec = KernelSpec::gaussian(0.9);
    const Matrix k = kernel_matrix(spec, x);
    const Index m = Index(rng.below(std::uint64_t(n)));
    const Vector v = kernel_vector(spec, x, x.row(m).transpose());
    CHECK(v == k.col(m));
    CHECK(v(m) == 1.0);
  }
}

TEST_CASE("linear kernel_vector is the dot-product vector") {
  Rng rng(306);
  const Matrix x = tu::random_matrix(rng, 6, 3);
  const Vector probe = tu::random_matrix(rng, 3, 1).col(0);
  const Vector v = kernel_vector(KernelSpec::linear(), x, probe);
  CHECK(tu::rel_diff(Matrix(v), Matrix(x * probe)) <= 1e-14);
}

TEST_CASE("precomputed kernels validate and resolve by exact match") {
  Rng rng(307);
  const Matrix x = tu::random_matrix(rng, 5, 2);
  const Matrix gram = tu::random_spd(rng, 5);
  const KernelSpec spec = KernelSpec::precomputed(gram);
  CHECK(kernel_matrix(spec, x) == gram);
  const Vector v = kernel_vector(spec, x, x.row(3).transpose());
  CHECK(v == gram.col(3));

  Vector unknown = x.row(3).transpose();
  unknown(0) += 1.0;
  CHECK_THROWS_AS(kernel_vector(spec, x, unknown), std::invalid_argument);

  Matrix asym = gram;
  asym(0, 1) += 1.0;
  CHECK_THROWS_AS(KernelSpec::precomputed(asym), std::invalid_argument);
  Matrix indef = Matrix::Identity(3, 3);
  indef(2, 2) = -1.0;
  CHECK_THROWS_AS(KernelSpec::precomputed(indef), std::invalid_argument);
  // Wrong size against the training inputs.
  CHECK_THROWS_AS(kernel_matrix(KernelSpec::precomputed(tu::random_spd(rng, 4)), x),
                  std::invalid_argument);
}

TEST_CASE("kernel_cross rows are kernel_vector results") {
  Rng rng(308);
  for (int c = 0; c < 30; ++c) {
    const Index n = 2 + Index(rng.below(8));
    const Index t = 1 + Index(rng.below(7));
    const Index d = 1 + Index(rng.below(4));
    const Matrix x = tu::random_matrix(rng, n, d);
    const Matrix xt = tu::random_matrix(rng, t, d);
    for (const KernelSpec& spec : {KernelSpec::gaussian(1.1), KernelSpec::linear()}) {
      const Matrix cross = kernel_cross(spec, x, xt);
      REQUIRE(cross.rows() == t);
      REQUIRE(cross.cols() == n);
      for (Index j = 0; j < t; ++j)
        CHECK(cross.row(j).transpose() == kernel_vector(spec, x, xt.row(j).transpose()));
    }
  }
}

TEST_CASE("kernel input validation") {
  Rng rng(309);
  const Matrix x = tu::random_matrix(rng, 4, 2);
  CHECK_THROWS_AS(KernelSpec::gaussian(0.0), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::gaussian(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(kernel_vector(KernelSpec::gaussian(1.0), x, Vector::Ones(3)),
                  std::invalid_argument);
}
