#pragma once

#include "krgs/graph.hpp"
#include "krgs/kernels.hpp"
#include "krgs/linalg.hpp"

// Serial, written-out counterparts of the parallel kernels. They follow the
// defining formulas with no blocking, symmetry exploitation, or threading,
// and exist so the fast paths can be checked against them (and timed against
// them in the benchmark). Not for production use.
namespace krgs::ref {

Matrix kronecker(const Matrix& A, const Matrix& B);

Matrix kernel_matrix(const KernelSpec& spec, const Matrix& X);

Matrix geodesic_distances(const std::vector<GeoCoord>& coords);

Matrix adjacency_from_distances(const Matrix& dist);

/// Edge-sum form of the Laplacian quadratic:
///   (1/2) sum_{i,j} A(i,j) (y_i - y_j)^2
double smoothness(const Graph& g, const Vector& y);

/// The dual normal-equation operator assembled term by term from its
/// definition: sum_n D_n^2 (x) k_n k_n' + alpha (I (x) K) + beta (L (x) K^2).
Matrix assemble_dual_system(const Matrix& gram, const Matrix& laplacian,
                            const Matrix& weights, double alpha, double beta);

}  // namespace krgs::ref
