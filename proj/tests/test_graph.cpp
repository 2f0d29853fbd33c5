#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "krgs/graph.hpp"
#include "krgs/reference.hpp"
#include "testutil.hpp"

using namespace krgs;

TEST_CASE("laplacian of a single unit edge") {
  Matrix a(2, 2), expected(2, 2);
  a << 0, 1, 1, 0;
  expected << 1, -1, -1, 1;
  CHECK(build_graph(a).laplacian == expected);
}

TEST_CASE("laplacian of the empty graph is zero") {
  const Graph g = build_graph(Matrix::Zero(4, 4));
  CHECK(g.laplacian == Matrix::Zero(4, 4));
}

TEST_CASE("laplacian of a weighted 3-node path") {
  Matrix a(3, 3), expected(3, 3);
  a << 0.0, 0.5, 0.0,
       0.5, 0.0, 2.0,
       0.0, 2.0, 0.0;
  expected << 0.5, -0.5, 0.0,
              -0.5, 2.5, -2.0,
              0.0, -2.0, 2.0;
  CHECK(build_graph(a).laplacian == expected);
}

TEST_CASE("build_graph validation") {
  Matrix a(2, 2);
  a << 0, 1, 1, 0;
  Matrix asym = a;
  asym(0, 1) = 2.0;  // relative asymmetry far above the repair threshold
  CHECK_THROWS_AS(build_graph(asym), std::invalid_argument);
  Matrix neg = a;
  neg(0, 1) = neg(1, 0) = -1.0;
  CHECK_THROWS_AS(build_graph(neg), std::invalid_argument);
  Matrix diag = a;
  diag(0, 0) = 0.5;
  CHECK_THROWS_AS(build_graph(diag), std::invalid_argument);
  CHECK_THROWS_AS(build_graph(Matrix::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("smoothness basics") {
  Matrix a(2, 2);
  a << 0, 1, 1, 0;
  const Graph g = build_graph(a);
  Vector y(2);
  y << 1, 0;
  CHECK(smoothness(g, y) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(smoothness(g, Vector::Ones(2) * 7.3) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("smoothness matches the once-per-edge sum on 120 random graphs") {
  Rng rng(201);
  for (int c = 0; c < 120; ++c) {
    const Index n = 2 + Index(rng.below(9));
    const Graph g = tu::random_graph(rng, n);
    const Vector y = tu::random_matrix(rng, n, 1).col(0);
    const double fast = smoothness(g, y);
    const double edge_sum = ref::smoothness(g, y);
    CHECK(tu::rel_diff(fast, edge_sum) <= 1e-12);
    CHECK(fast >= -1e-12 * y.squaredNorm());
  }
}

TEST_CASE("laplacian rows sum to zero and the matrix is PSD") {
  Rng rng(202);
  for (int c = 0; c < 100; ++c) {
    const Index n = 2 + Index(rng.below(9));
    const Graph g = tu::random_graph(rng, n);
    const Vector rowsum = g.laplacian.rowwise().sum();
    CHECK(rowsum.cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, g.laplacian.cwiseAbs().maxCoeff()));
    Eigen::SelfAdjointEigenSolver<Matrix> es(g.laplacian);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10 * std::max(1.0, g.laplacian.norm()));
  }
}

TEST_CASE("geodesic distances: zero diagonal, symmetry, a frozen city pair") {
  // Stockholm <-> Gothenburg on the 6371 km sphere.
  const std::vector<GeoCoord> coords = {{59.33, 18.07}, {57.71, 11.97}};
  const Matrix d = geodesic_distances(coords);
  CHECK(d(0, 0) == 0.0);
  CHECK(d(1, 1) == 0.0);
  CHECK(d(0, 1) == d(1, 0));
  CHECK(d(0, 1) == doctest::Approx(397.17424240505574).epsilon(1e-9));
  CHECK(std::abs(d(0, 1) - 398.0) <= 1.0);
}

TEST_CASE("geodesic distances reject out-of-range coordinates") {
  CHECK_THROWS_AS(geodesic_distances({{91.0, 0.0}, {0.0, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(geodesic_distances({{0.0, 181.0}, {0.0, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(geodesic_distances({{-90.5, 0.0}}), std::invalid_argument);
}

TEST_CASE("adjacency_from_distances worked examples") {
  // Three mutually equidistant nodes: S = 6 d^2, so every weight is exp(-1/6).
  Matrix d3(3, 3);
  d3 << 0, 5, 5,
        5, 0, 5,
        5, 5, 0;
  const Matrix a3 = adjacency_from_distances(d3);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j) {
      if (i == j)
        CHECK(a3(i, j) == 0.0);
      else
        CHECK(a3(i, j) == doctest::Approx(0.8464817248906141).epsilon(1e-14));
    }

  // Two nodes: S = 2 d^2, weight exp(-1/2).
  Matrix d2(2, 2);
  d2 << 0, 3, 3, 0;
  CHECK(adjacency_from_distances(d2)(0, 1) ==
        doctest::Approx(0.6065306597126334).epsilon(1e-14));

  // A coincident pair gets the maximal weight 1.
  Matrix dc(3, 3);
  dc << 0, 0, 4,
        0, 0, 4,
        4, 4, 0;
  CHECK(adjacency_from_distances(dc)(0, 1) == 1.0);
}

TEST_CASE("adjacency_from_distances properties and validation") {
  Rng rng(203);
  for (int c = 0; c < 100; ++c) {
    const Index n = 2 + Index(rng.below(9));
    std::vector<GeoCoord> coords = tu::random_coords(rng, n);
    const Matrix a = adjacency_from_distances(geodesic_distances(coords));
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) {
        if (i == j) {
          CHECK(a(i, j) == 0.0);
        } else {
          CHECK(a(i, j) > 0.0);
          CHECK(a(i, j) <= 1.0);
        }
      }
    CHECK_NOTHROW(build_graph(a));
  }
  CHECK_THROWS_AS(adjacency_from_distances(Matrix::Zero(3, 3)), std::invalid_argument);
  Matrix neg(2, 2);
  neg << 0, -1, -1, 0;
  CHECK_THROWS_AS(adjacency_from_distances(neg), std::invalid_argument);
}
