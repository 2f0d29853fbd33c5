#include "krgs/linalg.hpp"

#include <Eigen/Cholesky>
#include <stdexcept>
#include <string>

#include "krgs/errors.hpp"

namespace krgs {

namespace {

constexpr double kSymmetryTol = 1e-8;
constexpr double kResidualTol = 1e-8;

double relative_residual(const Matrix& S, const Vector& x, const Vector& b) {
  return (S * x - b).norm() / std::max(1.0, b.norm());
}

}  // namespace

Matrix kronecker(const Matrix& A, const Matrix& B, std::size_t cap) {
  if (!A.allFinite() || !B.allFinite())
    throw std::invalid_argument("kronecker: non-finite input");
  const std::size_t elems = std::size_t(A.size()) * std::size_t(B.size());
  if (elems > cap)
    throw std::invalid_argument("kronecker: result of " +
                                std::to_string(elems) +
                                " elements exceeds cap of " +
                                std::to_string(cap));
  const Index m = A.rows(), n = A.cols(), p = B.rows(), q = B.cols();
  Matrix out(m * p, n * q);
#pragma omp parallel for collapse(2) schedule(static)
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j)
      out.block(i * p, j * q, p, q) = A(i, j) * B;
  return out;
}

Vector vec(const Matrix& X) {
  return Eigen::Map<const Vector>(X.data(), X.size());
}

Matrix unvec(const Vector& v, Index rows, Index cols) {
  if (v.size() != rows * cols)
    throw std::invalid_argument("unvec: length " + std::to_string(v.size()) +
                                " does not match " + std::to_string(rows) +
                                "x" + std::to_string(cols));
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

PsdSolveResult solve_psd(const Matrix& S, const Vector& b) {
  if (S.rows() != S.cols())
    throw std::invalid_argument("solve_psd: matrix is not square");
  if (b.size() != S.rows())
    throw std::invalid_argument("solve_psd: rhs length mismatch");
  if (!S.allFinite() || !b.allFinite())
    throw std::invalid_argument("solve_psd: non-finite input");
  const double scale = S.cwiseAbs().maxCoeff();
  const double asym = (S - S.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTol * std::max(scale, 1.0))
    throw std::invalid_argument("solve_psd: matrix is not symmetric");

  const Index n = S.rows();
  auto attempt = [&](const Matrix& M) -> PsdSolveResult {
    Eigen::LLT<Matrix> llt(M);
    if (llt.info() != Eigen::Success) return {Vector{}, false, 1.0};
    Vector x = llt.solve(b);
    x += llt.solve(b - M * x);  // one refinement step tightens the residual
    const double resid = relative_residual(M, x, b);
    return {std::move(x), false, resid};
  };

  PsdSolveResult res = attempt(S);
  if (res.x.size() != 0 && res.residual <= kResidualTol) return res;

  const double jitter = 1e-10 * S.trace() / double(n);
  Matrix Sj = S;
  Sj.diagonal().array() += jitter;
  res = attempt(Sj);
  if (res.x.size() == 0 || res.residual > kResidualTol) {
    // Cholesky refused or stayed inaccurate; pivoted LDLT is the last try.
    Eigen::LDLT<Matrix> ldlt(Sj);
    if (ldlt.info() == Eigen::Success) {
      Vector x = ldlt.solve(b);
      x += ldlt.solve(b - Sj * x);
      const double resid = relative_residual(Sj, x, b);
      res = {std::move(x), false, resid};
    }
    if (res.x.size() == 0 || res.residual > kResidualTol)
      throw SolverError(
          "solve_psd: system singular beyond jitter recovery (residual " +
          std::to_string(res.residual) + ")");
  }
  res.jitter_applied = true;
  return res;
}

}  // namespace krgs
