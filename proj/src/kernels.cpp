#include "krgs/kernels.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <string>

namespace krgs {

KernelSpec KernelSpec::gaussian(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw std::invalid_argument("KernelSpec: gaussian sigma must be positive");
  KernelSpec s;
  s.family_ = GaussianKernel{sigma};
  return s;
}

KernelSpec KernelSpec::linear() {
  KernelSpec s;
  s.family_ = LinearKernel{};
  return s;
}

KernelSpec KernelSpec::precomputed(const Matrix& gram) {
  if (gram.rows() != gram.cols() || gram.rows() == 0)
    throw std::invalid_argument("KernelSpec: precomputed Gram must be square");
  if (!gram.allFinite())
    throw std::invalid_argument("KernelSpec: precomputed Gram non-finite");
  const double scale = std::max(gram.cwiseAbs().maxCoeff(), 1e-300);
  if ((gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale)
    throw std::invalid_argument("KernelSpec: precomputed Gram not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-8 * gram.norm())
    throw std::invalid_argument("KernelSpec: precomputed Gram not PSD");
  KernelSpec s;
  s.family_ = PrecomputedKernel{gram};
  return s;
}

Matrix kernel_matrix(const KernelSpec& spec, const Matrix& X) {
  const Index n = X.rows();
  if (n == 0) throw std::invalid_argument("kernel_matrix: empty input set");
  if (spec.is_precomputed()) {
    if (spec.gram().rows() != n)
      throw std::invalid_argument("kernel_matrix: precomputed Gram is " +
                                  std::to_string(spec.gram().rows()) +
                                  "x, expected " + std::to_string(n));
    return spec.gram();
  }
  Matrix K(n, n);
  if (spec.is_gaussian()) {
    const double inv = 1.0 / (2.0 * spec.sigma() * spec.sigma());
#pragma omp parallel for schedule(dynamic)
    for (Index i = 0; i < n; ++i) {
      K(i, i) = 1.0;
      for (Index j = i + 1; j < n; ++j) {
        const double k = std::exp(-(X.row(i) - X.row(j)).squaredNorm() * inv);
        K(i, j) = k;
        K(j, i) = k;
      }
    }
  } else {
#pragma omp parallel for schedule(dynamic)
    for (Index i = 0; i < n; ++i) {
      for (Index j = i; j < n; ++j) {
        const double k = X.row(i).dot(X.row(j));
        K(i, j) = k;
        K(j, i) = k;
      }
    }
  }
  return K;
}

Vector kernel_vector(const KernelSpec& spec, const Matrix& X,
                     const Vector& x) {
  const Index n = X.rows();
  if (x.size() != X.cols())
    throw std::invalid_argument("kernel_vector: test input has dimension " +
                                std::to_string(x.size()) + ", expected " +
                                std::to_string(X.cols()));
  if (spec.is_precomputed()) {
    if (spec.gram().rows() != n)
      throw std::invalid_argument("kernel_vector: precomputed Gram size mismatch");
    for (Index m = 0; m < n; ++m)
      if ((X.row(m).transpose().array() == x.array()).all())
        return spec.gram().col(m);
    throw std::invalid_argument(
        "kernel_vector: test input unknown to precomputed kernel");
  }
  Vector k(n);
  if (spec.is_gaussian()) {
    const double inv = 1.0 / (2.0 * spec.sigma() * spec.sigma());
    for (Index m = 0; m < n; ++m)
      k(m) = std::exp(-(X.row(m).transpose() - x).squaredNorm() * inv);
  } else {
    for (Index m = 0; m < n; ++m) k(m) = X.row(m).dot(x.transpose());
  }
  return k;
}

Matrix kernel_cross(const KernelSpec& spec, const Matrix& X,
                    const Matrix& X_test) {
  if (X_test.cols() != X.cols())
    throw std::invalid_argument("kernel_cross: test inputs have dimension " +
                                std::to_string(X_test.cols()) +
                                ", expected " + std::to_string(X.cols()));
  Matrix K(X_test.rows(), X.rows());
  if (spec.is_precomputed()) {
    // serial: the lookup may throw on an unknown input
    for (Index j = 0; j < X_test.rows(); ++j)
      K.row(j) = kernel_vector(spec, X, X_test.row(j).transpose()).transpose();
    return K;
  }
#pragma omp parallel for schedule(dynamic)
  for (Index j = 0; j < X_test.rows(); ++j) {
    K.row(j) =
        kernel_vector(spec, X, X_test.row(j).transpose()).transpose();
  }
  return K;
}

}  // namespace krgs
