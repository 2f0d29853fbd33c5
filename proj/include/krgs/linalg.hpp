#pragma once

#include <Eigen/Dense>
#include <cstddef>

namespace krgs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Largest element count a kronecker() result may have before the call is
/// rejected; keeps a typo'd instance from attempting a multi-GB allocation.
inline constexpr std::size_t kDefaultKroneckerCap = std::size_t{1} << 27;

/// Kronecker product: block (i, j) of the result is A(i, j) * B.
/// Throws std::invalid_argument on non-finite input or when the result
/// would exceed `cap` elements.
Matrix kronecker(const Matrix& A, const Matrix& B,
                 std::size_t cap = kDefaultKroneckerCap);

/// Column-major vectorization: stacks the columns of X top to bottom.
Vector vec(const Matrix& X);

/// Inverse of vec(): reshapes v (length rows*cols) into a rows x cols
/// matrix, consuming consecutive length-`rows` sections as columns.
/// Throws std::invalid_argument on a length mismatch.
Matrix unvec(const Vector& v, Index rows, Index cols);

struct PsdSolveResult {
  Vector x;
  bool jitter_applied = false;  // true when S was regularized to S + eps*I
  double residual = 0.0;        // ||S x - b||_2 / max(1, ||b||_2)
};

/// Solves S x = b for symmetric positive (semi)definite S.
///
/// S must be symmetric within 1e-8 relative; a Cholesky factorization is
/// attempted and the solution refined until the relative residual is at most
/// 1e-8. A singular or near-singular S is retried as
/// (S + jitter*I) x = b with jitter = 1e-10 * trace(S) / n, and the result
/// flags that jitter was applied. Throws std::invalid_argument for
/// non-symmetric or non-finite input, SolverError when even the jittered
/// system cannot be solved to tolerance.
PsdSolveResult solve_psd(const Matrix& S, const Vector& b);

}  // namespace krgs
