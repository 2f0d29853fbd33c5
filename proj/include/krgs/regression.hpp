#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "krgs/graph.hpp"
#include "krgs/kernels.hpp"
#include "krgs/linalg.hpp"

namespace krgs {

struct Hyperparams {
  double alpha = 1.0;   // coefficient-norm regularization, > 0 for fitting
  double beta = 0.0;    // graph-smoothness regularization, >= 0
  double delta = 0.1;   // IRLS smoothing constant, > 0
  int max_iterations = 10;
  double tol = 1e-8;    // early stop on relative Frobenius change of the
                        // dual coefficients; 0 disables
  // Reweight by |(t - y) + delta|^(-1/2) instead of (|t - y| + delta)^(-1/2).
  // Sign-sensitive and unbounded near residual == -delta; kept only for
  // comparison runs.
  bool literal_delta_weights = false;

  void validate() const;
};

struct TrainingSet {
  Matrix inputs;   // N x N_i, row n is the nth input vector
  Matrix targets;  // N x M, row n is the nth target signal
  Graph graph;     // over the M output nodes
  std::optional<Matrix> clean_targets;  // pre-corruption targets, if known
};

/// Validates shapes and finiteness; the only supported way to build one.
TrainingSet make_training_set(Matrix inputs, Matrix targets, Graph graph,
                              std::optional<Matrix> clean_targets = {});

/// Per-observation IRLS weights and per-iteration bookkeeping. weights(n, i)
/// is the ith diagonal entry of the nth observation's weighting matrix.
struct IrlsState {
  Matrix weights;
  int iteration = 0;
  std::vector<double> cost_history;  // robust cost C1 after each solve
};

struct FitDiagnostics {
  int iterations_run = 0;
  bool converged = false;  // stopped on tol before max_iterations
  std::vector<double> cost_history;
  std::vector<double> gradient_norms;     // stationarity check per solve
  std::vector<double> coef_rel_changes;   // between consecutive solves
  std::vector<bool> jitter_by_iteration;  // solve needed diagonal jitter
  int jitter_count = 0;
};

struct KrgsModel {
  Matrix dual_coef;     // N x M
  KernelSpec kernel;
  Matrix train_inputs;  // stored copy for kernel evaluations at predict time
  Hyperparams hyper;
  IrlsState state;      // final weights
  FitDiagnostics diagnostics;
};

/// d(n,i) = (|targets - fitted| + delta)^(-1/2) elementwise; the
/// literal_delta variant applies delta inside the absolute value instead.
/// Throws on shape mismatch, non-finite residuals, or a non-finite weight.
Matrix irls_update_weights(const Matrix& targets, const Matrix& fitted,
                           double delta, bool literal_delta = false);

/// Row n of the result is d_n^2 (elementwise squared weights) times t_n.
Matrix weighted_targets(const Matrix& targets, const Matrix& weights);

struct DualSystem {
  Matrix system;        // MN x MN, symmetric
  Matrix rhs_operator;  // I_M (x) K
};

/// Builds the normal-equation operator of one weighted dual solve:
///   system = sum_n D_n^2 (x) k_n k_n' + alpha (I_M (x) K) + beta (L (x) K^2)
/// with k_n the nth column of the Gram matrix.
DualSystem assemble_dual_system(const Matrix& gram, const Matrix& laplacian,
                                const Matrix& weights, double alpha,
                                double beta);

struct WeightedSolve {
  Matrix dual_coef;  // N x M
  bool jitter_applied = false;
};

/// One weighted least-squares solve of the dual problem: returns Psi with
/// system * vec(Psi) = (I_M (x) K) vec(T_D). This is the body of a single
/// IRLS iteration; fit_krgs drives it in a loop.
WeightedSolve solve_dual_weighted(const Matrix& gram, const Matrix& laplacian,
                                  const Matrix& targets, const Matrix& weights,
                                  double alpha, double beta);

/// Called after each IRLS solve with the iteration number (1-based) and the
/// dual coefficients of that iteration.
using IterationObserver =
    std::function<void(int iteration, const Matrix& dual_coef)>;

/// Full IRLS fit: identity weights first, then alternate weighted dual
/// solves with residual-based reweighting, up to max_iterations or until the
/// relative change of the coefficients drops below tol.
KrgsModel fit_krgs(const TrainingSet& train, const KernelSpec& kernel,
                   const Hyperparams& hyper,
                   const IterationObserver& observer = {});

/// The pure l2 baseline: a single weighted solve with identity weights.
/// Identical to fit_krgs with max_iterations = 1.
KrgsModel fit_krg(const TrainingSet& train, const KernelSpec& kernel,
                  double alpha, double beta);

/// y = Psi' k(x).
Vector predict(const KrgsModel& model, const Vector& x);

/// Row-wise batch form; row j is the prediction for row j of X.
Matrix predict(const KrgsModel& model, const Matrix& X);

/// Robust cost C1 = sum_n ||t_n - y_n||_1 + alpha * model_norm
///                + beta * sum_n y_n' L y_n,
/// where model_norm is tr(W'W) in the primal or tr(Psi' K Psi) in the dual.
double eval_cost_l1(const TrainingSet& train, const Matrix& fitted,
                    double model_norm, double alpha, double beta);

/// Gradient of the weighted dual cost at Psi:
///   -2 K T_D + 2 sum_n k_n k_n' Psi D_n^2 + 2 alpha K Psi + 2 beta K^2 Psi L
Matrix dual_gradient(const Matrix& dual_coef, const Matrix& gram,
                     const Matrix& laplacian, const Matrix& weighted_t,
                     const Matrix& weights, double alpha, double beta);

/// Explicit feature function for the primal formulation.
struct FeatureMap {
  std::function<Vector(const Vector&)> phi;
  Index dim = 0;

  static FeatureMap identity(Index input_dim);
};

/// Closed-form weighted primal solve; returns the coefficient matrix W
/// (feature_dim x M) with predictions y = W' phi(x). Small instances only;
/// exists as the algebraic mirror of solve_dual_weighted.
Matrix fit_lrgs_primal(const FeatureMap& features, const TrainingSet& train,
                       const Hyperparams& hyper, const Matrix& weights);

}  // namespace krgs
