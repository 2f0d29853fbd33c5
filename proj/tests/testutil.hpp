#pragma once

#include <algorithm>
#include <vector>

#include "krgs/graph.hpp"
#include "krgs/kernels.hpp"
#include "krgs/linalg.hpp"
#include "krgs/regression.hpp"
#include "krgs/rng.hpp"

// Random instance generators shared across the test files. Everything is
// driven by krgs::Rng so failures reproduce from the seed in the test.
namespace tu {

using krgs::Graph;
using krgs::Index;
using krgs::Matrix;
using krgs::Rng;
using krgs::Vector;

inline Matrix random_matrix(Rng& rng, Index rows, Index cols,
                            double scale = 1.0) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
  return m;
}

inline Matrix random_uniform(Rng& rng, Index rows, Index cols, double lo,
                             double hi) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(lo, hi);
  return m;
}

/// Symmetric, nonnegative, zero-diagonal adjacency with ~`density` edges.
inline Matrix random_adjacency(Rng& rng, Index m, double density = 0.7) {
  Matrix a = Matrix::Zero(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = i + 1; j < m; ++j)
      if (rng.uniform() < density) {
        const double w = rng.uniform(0.1, 2.0);
        a(i, j) = w;
        a(j, i) = w;
      }
  return a;
}

inline Graph random_graph(Rng& rng, Index m, double density = 0.7) {
  return krgs::build_graph(random_adjacency(rng, m, density));
}

inline std::vector<krgs::GeoCoord> random_coords(Rng& rng, Index m) {
  std::vector<krgs::GeoCoord> coords;
  for (Index i = 0; i < m; ++i)
    coords.emplace_back(rng.uniform(55.0, 68.5), rng.uniform(11.0, 24.0));
  return coords;
}

inline Graph random_geo_graph(Rng& rng, Index m) {
  return krgs::build_graph(krgs::adjacency_from_distances(
      krgs::geodesic_distances(random_coords(rng, m))));
}

/// Entries in [0.1, 3]: valid IRLS weights bounded away from zero.
inline Matrix random_weights(Rng& rng, Index n, Index m) {
  return random_uniform(rng, n, m, 0.1, 3.0);
}

/// Random SPD matrix G G' + I.
inline Matrix random_spd(Rng& rng, Index n) {
  const Matrix g = random_matrix(rng, n, n);
  Matrix s = g * g.transpose();
  s.diagonal().array() += 1.0;
  return s;
}

inline krgs::TrainingSet random_training(Rng& rng, Index n, Index m,
                                         Index input_dim,
                                         double density = 0.7) {
  return krgs::make_training_set(random_matrix(rng, n, input_dim),
                                 random_matrix(rng, n, m),
                                 random_graph(rng, m, density));
}

inline double rel_diff(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

}  // namespace tu
