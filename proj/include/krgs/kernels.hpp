#pragma once

#include <variant>

#include "krgs/linalg.hpp"

namespace krgs {

struct GaussianKernel {
  double sigma = 1.0;  // k(x, x') = exp(-||x - x'||^2 / (2 sigma^2))
};

struct LinearKernel {};  // k(x, x') = x' . x

/// Hand-built Gram matrix over the training inputs. kernel_vector() resolves
/// a test input by exact match against a training input and returns the
/// corresponding column; anything else is an error.
struct PrecomputedKernel {
  Matrix gram;
};

class KernelSpec {
 public:
  static KernelSpec gaussian(double sigma);
  static KernelSpec linear();
  /// Validates that `gram` is symmetric PSD within 1e-8 relative.
  static KernelSpec precomputed(const Matrix& gram);

  bool is_gaussian() const { return std::holds_alternative<GaussianKernel>(family_); }
  bool is_linear() const { return std::holds_alternative<LinearKernel>(family_); }
  bool is_precomputed() const { return std::holds_alternative<PrecomputedKernel>(family_); }
  double sigma() const { return std::get<GaussianKernel>(family_).sigma; }
  const Matrix& gram() const { return std::get<PrecomputedKernel>(family_).gram; }

 private:
  std::variant<GaussianKernel, LinearKernel, PrecomputedKernel> family_;
};

/// Gram matrix over training inputs (rows of X). K(m, n) = k(x_m, x_n).
/// Throws on inconsistent input dimensions or a precomputed Gram of the
/// wrong size.
Matrix kernel_matrix(const KernelSpec& spec, const Matrix& X);

/// Kernel evaluations of one test input against every training input:
/// entry n is k(x_n, x).
Vector kernel_vector(const KernelSpec& spec, const Matrix& X, const Vector& x);

/// Batch form of kernel_vector: row j of the result is
/// kernel_vector(spec, X, X_test.row(j)) transposed.
Matrix kernel_cross(const KernelSpec& spec, const Matrix& X,
                    const Matrix& X_test);

}  // namespace krgs
