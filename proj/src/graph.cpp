#include "krgs/graph.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace krgs {

namespace {
constexpr double kEarthRadiusKm = 6371.0;
constexpr double kAsymmetryTol = 1e-9;

double deg2rad(double deg) { return deg * M_PI / 180.0; }

double haversine_km(const GeoCoord& a, const GeoCoord& b) {
  const double lat1 = deg2rad(a.first), lon1 = deg2rad(a.second);
  const double lat2 = deg2rad(b.first), lon2 = deg2rad(b.second);
  const double sdlat = std::sin((lat2 - lat1) / 2.0);
  const double sdlon = std::sin((lon2 - lon1) / 2.0);
  const double h =
      sdlat * sdlat + std::cos(lat1) * std::cos(lat2) * sdlon * sdlon;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}
}  // namespace

Graph build_graph(const Matrix& A) {
  if (A.rows() != A.cols())
    throw std::invalid_argument("build_graph: adjacency is not square");
  if (!A.allFinite())
    throw std::invalid_argument("build_graph: non-finite adjacency entry");
  const Index m = A.rows();
  const double scale = std::max(A.cwiseAbs().maxCoeff(), 1e-300);
  const double asym = (A - A.transpose()).cwiseAbs().maxCoeff();
  if (asym > kAsymmetryTol * scale)
    throw std::invalid_argument(
        "build_graph: adjacency asymmetric beyond tolerance");
  for (Index i = 0; i < m; ++i) {
    if (A(i, i) != 0.0)
      throw std::invalid_argument("build_graph: nonzero diagonal at node " +
                                  std::to_string(i));
    for (Index j = 0; j < m; ++j)
      if (A(i, j) < 0.0)
        throw std::invalid_argument("build_graph: negative weight at (" +
                                    std::to_string(i) + "," +
                                    std::to_string(j) + ")");
  }

  Graph g;
  g.node_count = m;
  g.adjacency = (A + A.transpose()) / 2.0;
  g.laplacian = Matrix(g.adjacency.rowwise().sum().asDiagonal());
  g.laplacian -= g.adjacency;
  return g;
}

double smoothness(const Graph& g, const Vector& y) {
  if (y.size() != g.node_count)
    throw std::invalid_argument("smoothness: signal length " +
                                std::to_string(y.size()) + " on graph of " +
                                std::to_string(g.node_count) + " nodes");
  return y.dot(g.laplacian * y);
}

Matrix geodesic_distances(const std::vector<GeoCoord>& coords) {
  const Index m = static_cast<Index>(coords.size());
  for (Index i = 0; i < m; ++i) {
    const auto& [lat, lon] = coords[i];
    if (!(lat >= -90.0 && lat <= 90.0) || !(lon >= -180.0 && lon <= 180.0))
      throw std::invalid_argument(
          "geodesic_distances: coordinate out of range at node " +
          std::to_string(i));
  }
  Matrix d = Matrix::Zero(m, m);
#pragma omp parallel for schedule(dynamic)
  for (Index i = 0; i < m; ++i)
    for (Index j = i + 1; j < m; ++j) {
      const double km = haversine_km(coords[i], coords[j]);
      d(i, j) = km;
      d(j, i) = km;
    }
  return d;
}

Matrix adjacency_from_distances(const Matrix& dist) {
  if (dist.rows() != dist.cols())
    throw std::invalid_argument("adjacency_from_distances: not square");
  if (!dist.allFinite())
    throw std::invalid_argument("adjacency_from_distances: non-finite entry");
  const Index m = dist.rows();
  double norm = 0.0;
  for (Index i = 0; i < m; ++i) {
    if (dist(i, i) != 0.0)
      throw std::invalid_argument(
          "adjacency_from_distances: nonzero diagonal");
    for (Index j = 0; j < m; ++j) {
      if (dist(i, j) < 0.0)
        throw std::invalid_argument(
            "adjacency_from_distances: negative distance");
      if (std::abs(dist(i, j) - dist(j, i)) >
          kAsymmetryTol * std::max(1.0, dist.cwiseAbs().maxCoeff()))
        throw std::invalid_argument(
            "adjacency_from_distances: asymmetric distances");
      if (i != j) norm += dist(i, j) * dist(i, j);
    }
  }
  if (norm == 0.0)
    throw std::invalid_argument(
        "adjacency_from_distances: all distances zero, normalizer undefined");

  Matrix a = Matrix::Zero(m, m);
#pragma omp parallel for schedule(dynamic)
  for (Index i = 0; i < m; ++i)
    for (Index j = i + 1; j < m; ++j) {
      const double w = std::exp(-dist(i, j) * dist(i, j) / norm);
      a(i, j) = w;
      a(j, i) = w;
    }
  return a;
}

}  // namespace krgs
