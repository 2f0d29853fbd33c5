#include "krgs/reference.hpp"

#include <cmath>
#include <stdexcept>

namespace krgs::ref {
namespace {

constexpr double kEarthRadiusKm = 6371.0;

double deg2rad(double d) { return d * 3.14159265358979323846 / 180.0; }

}  // namespace

Matrix kronecker(const Matrix& A, const Matrix& B) {
  Matrix out(A.rows() * B.rows(), A.cols() * B.cols());
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = 0; j < A.cols(); ++j)
      for (Index k = 0; k < B.rows(); ++k)
        for (Index l = 0; l < B.cols(); ++l)
          out(i * B.rows() + k, j * B.cols() + l) = A(i, j) * B(k, l);
  return out;
}

Matrix kernel_matrix(const KernelSpec& spec, const Matrix& X) {
  const Index n = X.rows();
  if (n == 0) throw std::invalid_argument("ref::kernel_matrix: empty input");
  if (spec.is_precomputed()) {
    if (spec.gram().rows() != n)
      throw std::invalid_argument("ref::kernel_matrix: Gram size mismatch");
    return spec.gram();
  }
  Matrix K(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (spec.is_gaussian()) {
        double sq = 0.0;
        for (Index d = 0; d < X.cols(); ++d) {
          const double diff = X(i, d) - X(j, d);
          sq += diff * diff;
        }
        K(i, j) = i == j ? 1.0
                         : std::exp(-sq / (2.0 * spec.sigma() * spec.sigma()));
      } else {
        double dot = 0.0;
        for (Index d = 0; d < X.cols(); ++d) dot += X(i, d) * X(j, d);
        K(i, j) = dot;
      }
    }
  }
  return K;
}

Matrix geodesic_distances(const std::vector<GeoCoord>& coords) {
  const Index n = static_cast<Index>(coords.size());
  Matrix d(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i == j) {
        d(i, j) = 0.0;
        continue;
      }
      const double lat1 = deg2rad(coords[i].first);
      const double lat2 = deg2rad(coords[j].first);
      const double dlat = lat2 - lat1;
      const double dlon = deg2rad(coords[j].second - coords[i].second);
      const double h = std::sin(dlat / 2.0) * std::sin(dlat / 2.0) +
                       std::cos(lat1) * std::cos(lat2) *
                           std::sin(dlon / 2.0) * std::sin(dlon / 2.0);
      d(i, j) =
          2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
    }
  }
  return d;
}

Matrix adjacency_from_distances(const Matrix& dist) {
  const Index n = dist.rows();
  double total = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (i != j) total += dist(i, j) * dist(i, j);
  if (total <= 0.0)
    throw std::invalid_argument(
        "ref::adjacency_from_distances: all distances are zero");
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      a(i, j) = i == j ? 0.0 : std::exp(-dist(i, j) * dist(i, j) / total);
  return a;
}

double smoothness(const Graph& g, const Vector& y) {
  if (y.size() != g.node_count)
    throw std::invalid_argument("ref::smoothness: signal size mismatch");
  double acc = 0.0;
  for (Index i = 0; i < g.node_count; ++i)
    for (Index j = 0; j < g.node_count; ++j) {
      const double diff = y(i) - y(j);
      acc += g.adjacency(i, j) * diff * diff;
    }
  return 0.5 * acc;
}

Matrix assemble_dual_system(const Matrix& gram, const Matrix& laplacian,
                            const Matrix& weights, double alpha, double beta) {
  const Index n = gram.rows();
  const Index m = laplacian.rows();
  if (weights.rows() != n || weights.cols() != m)
    throw std::invalid_argument(
        "ref::assemble_dual_system: weights must be observations x nodes");
  Matrix system = Matrix::Zero(m * n, m * n);
  for (Index obs = 0; obs < n; ++obs) {
    Matrix dsq = Matrix::Zero(m, m);
    for (Index i = 0; i < m; ++i)
      dsq(i, i) = weights(obs, i) * weights(obs, i);
    const Matrix outer = gram.col(obs) * gram.col(obs).transpose();
    system += kronecker(dsq, outer);
  }
  system += alpha * kronecker(Matrix::Identity(m, m), gram);
  system += beta * kronecker(laplacian, gram * gram);
  return system;
}

}  // namespace krgs::ref
