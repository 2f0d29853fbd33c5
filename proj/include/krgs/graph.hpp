#pragma once

#include <utility>
#include <vector>

#include "krgs/linalg.hpp"

namespace krgs {

/// Undirected weighted graph over the output nodes. Constructed only through
/// build_graph(), which enforces: adjacency symmetric with zero diagonal and
/// nonnegative weights, laplacian = degree(adjacency) - adjacency.
struct Graph {
  Index node_count = 0;
  Matrix adjacency;
  Matrix laplacian;

  Vector degrees() const { return adjacency.rowwise().sum(); }
};

/// Validates A and builds the graph. A must be square, finite, nonnegative,
/// with an exactly zero diagonal. Asymmetry up to 1e-9 relative is repaired
/// by averaging with the transpose; anything larger throws.
Graph build_graph(const Matrix& A);

/// Quadratic form y' L y, the graph smoothness of signal y.
/// Equals the once-per-edge sum of A(i,j) * (y(i) - y(j))^2.
double smoothness(const Graph& g, const Vector& y);

/// (latitude, longitude) in degrees.
using GeoCoord = std::pair<double, double>;

/// Pairwise great-circle distances in km (haversine, spherical Earth of
/// radius 6371.0 km). Throws on out-of-range coordinates.
Matrix geodesic_distances(const std::vector<GeoCoord>& coords);

/// Adjacency weights A(i,j) = exp(-d(i,j)^2 / S) for i != j, where S sums
/// d^2 over all ordered pairs i != j; the diagonal is zero. Throws when the
/// distance matrix is invalid or all zero (normalizer undefined).
Matrix adjacency_from_distances(const Matrix& dist);

}  // namespace krgs
