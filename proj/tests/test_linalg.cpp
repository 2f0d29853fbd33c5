#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "krgs/errors.hpp"
#include "krgs/linalg.hpp"
#include "krgs/reference.hpp"
#include "testutil.hpp"

using namespace krgs;

TEST_CASE("kronecker identity and scalar cases") {
  const Matrix i2 = Matrix::Identity(2, 2);
  CHECK(kronecker(i2, i2) == Matrix::Identity(4, 4));

  Rng rng(101);
  const Matrix b = tu::random_matrix(rng, 3, 4);
  Matrix c(1, 1);
  c << 3.0;
  CHECK(kronecker(c, b) == 3.0 * b);
}

TEST_CASE("kronecker 2x2 worked example") {
  Matrix a(2, 2), b(2, 2), expected(4, 4);
  a << 1, 2, 3, 4;
  b << 0, 1, 1, 0;
  expected << 0, 1, 0, 2,
              1, 0, 2, 0,
              0, 3, 0, 4,
              3, 0, 4, 0;
  CHECK(kronecker(a, b) == expected);
}

TEST_CASE("kronecker block structure matches the definition on 120 cases") {
  Rng rng(102);
  for (int c = 0; c < 120; ++c) {
    const Index m = 1 + Index(rng.below(5)), n = 1 + Index(rng.below(5));
    const Index p = 1 + Index(rng.below(5)), q = 1 + Index(rng.below(5));
    const Matrix a = tu::random_matrix(rng, m, n);
    const Matrix b = tu::random_matrix(rng, p, q);
    const Matrix k = kronecker(a, b);
    REQUIRE(k.rows() == m * p);
    REQUIRE(k.cols() == n * q);
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < n; ++j)
        CHECK(k.block(i * p, j * q, p, q) == a(i, j) * b);
    CHECK(k == ref::kronecker(a, b));
  }
}

TEST_CASE("kronecker rejects oversized results and non-finite input") {
  Rng rng(103);
  const Matrix a = tu::random_matrix(rng, 8, 8);
  CHECK_THROWS_AS(kronecker(a, a, 1000), std::invalid_argument);
  Matrix bad = a;
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(kronecker(bad, a), std::invalid_argument);
}

TEST_CASE("vec stacks columns top to bottom") {
  Matrix x(2, 2);
  x << 1, 3,
       2, 4;
  Vector expected(4);
  expected << 1, 2, 3, 4;
  CHECK(vec(x) == expected);
}

TEST_CASE("unvec inverts vec bitwise on 150 random shapes") {
  Rng rng(104);
  for (int c = 0; c < 150; ++c) {
    const Index n = 1 + Index(rng.below(7)), m = 1 + Index(rng.below(7));
    const Matrix x = tu::random_matrix(rng, n, m);
    CHECK(unvec(vec(x), n, m) == x);
    const Vector v = tu::random_matrix(rng, n * m, 1).col(0);
    CHECK(vec(unvec(v, n, m)) == v);
  }
  CHECK_THROWS_AS(unvec(Vector::Zero(5), 2, 2), std::invalid_argument);
}

TEST_CASE("vec(AXB) equals (B' kron A) vec(X) on 120 cases") {
  Rng rng(105);
  for (int c = 0; c < 120; ++c) {
    const Index p = 1 + Index(rng.below(5)), n = 1 + Index(rng.below(5));
    const Index m = 1 + Index(rng.below(5)), q = 1 + Index(rng.below(5));
    const Matrix a = tu::random_matrix(rng, p, n);
    const Matrix x = tu::random_matrix(rng, n, m);
    const Matrix b = tu::random_matrix(rng, m, q);
    const Vector lhs = vec(a * x * b);
    const Vector rhs = kronecker(b.transpose(), a) * vec(x);
    CHECK((lhs - rhs).norm() <= 1e-12 * std::max(rhs.norm(), 1.0));
  }
}

TEST_CASE("solve_psd identity and scalar cases") {
  Rng rng(106);
  const Vector b = tu::random_matrix(rng, 6, 1).col(0);
  const PsdSolveResult res = solve_psd(Matrix::Identity(6, 6), b);
  CHECK(res.x == b);
  CHECK_FALSE(res.jitter_applied);

  Matrix s(1, 1);
  s << 2.0;
  Vector b1(1);
  b1 << 4.0;
  CHECK(solve_psd(s, b1).x(0) == 2.0);
}

TEST_CASE("solve_psd meets the residual bound on 120 random SPD systems") {
  Rng rng(107);
  for (int c = 0; c < 120; ++c) {
    const Index n = 2 + Index(rng.below(19));
    const Matrix s = tu::random_spd(rng, n);
    const Vector b = tu::random_matrix(rng, n, 1).col(0);
    const PsdSolveResult res = solve_psd(s, b);
    CHECK_FALSE(res.jitter_applied);
    const double resid = (s * res.x - b).norm() / std::max(1.0, b.norm());
    CHECK(resid <= 1e-10);
  }
}

TEST_CASE("solve_psd recovers a singular system via jitter") {
  // rank-1 PSD with b in the range: x with ones*x = 3 exists.
  const Matrix s = Matrix::Ones(3, 3);
  const Vector b = Vector::Ones(3) * 3.0;
  const PsdSolveResult res = solve_psd(s, b);
  CHECK(res.jitter_applied);
  CHECK(res.x.allFinite());
  CHECK((s * res.x - b).norm() / b.norm() <= 1e-6);
}

TEST_CASE("solve_psd input validation") {
  Rng rng(108);
  Matrix s = tu::random_spd(rng, 4);
  const Vector b = Vector::Ones(4);
  Matrix asym = s;
  asym(0, 1) += 1.0;  // way past the symmetry tolerance
  CHECK_THROWS_AS(solve_psd(asym, b), std::invalid_argument);
  CHECK_THROWS_AS(solve_psd(s, Vector::Ones(3)), std::invalid_argument);
  s(1, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(solve_psd(s, b), std::invalid_argument);
}
