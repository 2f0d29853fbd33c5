#include "krgs/regression.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "krgs/errors.hpp"

namespace krgs {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

// alpha (I_M (x) K) + beta (L (x) K2), laid out block-wise: the (i, j) block
// of size N x N is beta * L(i,j) * K2, plus alpha * K on the diagonal. K2 is
// the squared Gram matrix. The data-fit term is added per IRLS iteration by
// add_weighted_blocks, so this part is assembled once per fit.
Matrix regularizer_blocks(const Matrix& gram, const Matrix& gram_sq,
                          const Matrix& laplacian, double alpha, double beta) {
  const Index n = gram.rows();
  const Index m = laplacian.rows();
  Matrix s = Matrix::Zero(m * n, m * n);
#pragma omp parallel for collapse(2)
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < m; ++i) {
      const double lij = beta * laplacian(i, j);
      if (lij != 0.0) s.block(i * n, j * n, n, n) = lij * gram_sq;
      if (i == j) s.block(i * n, j * n, n, n).noalias() += alpha * gram;
    }
  }
  return s;
}

// Adds sum_n D_n^2 (x) k_n k_n' in its block-diagonal form: block i is
// K diag(w_i) K with w_i(n) = weights(n, i)^2.
void add_weighted_blocks(Matrix& system, const Matrix& gram,
                         const Matrix& weights) {
  const Index n = gram.rows();
  const Index m = weights.cols();
#pragma omp parallel for
  for (Index i = 0; i < m; ++i) {
    const Vector wsq = weights.col(i).array().square();
    system.block(i * n, i * n, n, n).noalias() +=
        gram * wsq.asDiagonal() * gram;
  }
}

struct SolveOutcome {
  Matrix dual_coef;
  bool jitter_applied = false;
};

SolveOutcome run_weighted_solve(const Matrix& regularizer, const Matrix& gram,
                                const Matrix& targets, const Matrix& weights) {
  Matrix system = regularizer;
  add_weighted_blocks(system, gram, weights);
  const Matrix weighted = weighted_targets(targets, weights);
  const Vector rhs = vec(gram * weighted);
  PsdSolveResult res = solve_psd(system, rhs);
  return {unvec(res.x, gram.rows(), weights.cols()), res.jitter_applied};
}

void check_training_against_kernel(const TrainingSet& train,
                                   const KernelSpec& kernel) {
  if (kernel.is_precomputed()) {
    require(kernel.gram().rows() == train.inputs.rows(),
            "precomputed kernel size does not match the training set");
  }
}

}  // namespace

void Hyperparams::validate() const {
  require(std::isfinite(alpha) && alpha > 0.0, "alpha must be positive");
  require(std::isfinite(beta) && beta >= 0.0, "beta must be nonnegative");
  require(std::isfinite(delta) && delta > 0.0, "delta must be positive");
  require(max_iterations >= 1, "max_iterations must be at least 1");
  require(std::isfinite(tol) && tol >= 0.0, "tol must be nonnegative");
}

TrainingSet make_training_set(Matrix inputs, Matrix targets, Graph graph,
                              std::optional<Matrix> clean_targets) {
  require(inputs.rows() >= 1, "training set must contain observations");
  require(inputs.rows() == targets.rows(),
          "inputs and targets disagree on the number of observations");
  require(targets.cols() == graph.node_count,
          "target width does not match the graph's node count");
  require(inputs.allFinite(), "training inputs contain non-finite values");
  require(targets.allFinite(), "training targets contain non-finite values");
  if (clean_targets) {
    require(clean_targets->rows() == targets.rows() &&
                clean_targets->cols() == targets.cols(),
            "clean targets must match the target shape");
    require(clean_targets->allFinite(),
            "clean targets contain non-finite values");
  }
  return {std::move(inputs), std::move(targets), std::move(graph),
          std::move(clean_targets)};
}

Matrix irls_update_weights(const Matrix& targets, const Matrix& fitted,
                           double delta, bool literal_delta) {
  require(targets.rows() == fitted.rows() && targets.cols() == fitted.cols(),
          "targets and fitted values disagree in shape");
  require(std::isfinite(delta) && delta > 0.0, "delta must be positive");
  const Matrix resid = targets - fitted;
  require(resid.allFinite(), "residuals contain non-finite values");
  Matrix weights;
  if (literal_delta) {
    weights = (resid.array() + delta).abs().pow(-0.5);
  } else {
    weights = (resid.array().abs() + delta).pow(-0.5);
  }
  if (!weights.allFinite()) {
    throw std::invalid_argument(
        "IRLS weights are non-finite (residual hit -delta under the "
        "sign-sensitive update)");
  }
  return weights;
}

Matrix weighted_targets(const Matrix& targets, const Matrix& weights) {
  require(targets.rows() == weights.rows() && targets.cols() == weights.cols(),
          "targets and weights disagree in shape");
  return targets.array() * weights.array().square();
}

DualSystem assemble_dual_system(const Matrix& gram, const Matrix& laplacian,
                                const Matrix& weights, double alpha,
                                double beta) {
  const Index n = gram.rows();
  const Index m = laplacian.rows();
  require(gram.cols() == n, "Gram matrix must be square");
  require(weights.rows() == n && weights.cols() == m,
          "weights must be observations x nodes");
  require(std::isfinite(alpha) && alpha > 0.0, "alpha must be positive");
  require(std::isfinite(beta) && beta >= 0.0, "beta must be nonnegative");
  const Matrix gram_sq = gram * gram;
  Matrix system = regularizer_blocks(gram, gram_sq, laplacian, alpha, beta);
  add_weighted_blocks(system, gram, weights);
  return {std::move(system), kronecker(Matrix::Identity(m, m), gram)};
}

WeightedSolve solve_dual_weighted(const Matrix& gram, const Matrix& laplacian,
                                  const Matrix& targets, const Matrix& weights,
                                  double alpha, double beta) {
  const Index n = gram.rows();
  const Index m = laplacian.rows();
  require(targets.rows() == n && targets.cols() == m,
          "targets must be observations x nodes");
  require(weights.rows() == n && weights.cols() == m,
          "weights must be observations x nodes");
  require(std::isfinite(alpha) && alpha > 0.0, "alpha must be positive");
  require(std::isfinite(beta) && beta >= 0.0, "beta must be nonnegative");
  const Matrix gram_sq = gram * gram;
  const Matrix reg = regularizer_blocks(gram, gram_sq, laplacian, alpha, beta);
  SolveOutcome out = run_weighted_solve(reg, gram, targets, weights);
  return {std::move(out.dual_coef), out.jitter_applied};
}

KrgsModel fit_krgs(const TrainingSet& train, const KernelSpec& kernel,
                   const Hyperparams& hyper, const IterationObserver& observer) {
  hyper.validate();
  check_training_against_kernel(train, kernel);
  const Index n = train.inputs.rows();
  const Index m = train.targets.cols();

  const Matrix gram = kernel_matrix(kernel, train.inputs);
  const Matrix gram_sq = gram * gram;
  const Matrix& laplacian = train.graph.laplacian;
  const Matrix regularizer =
      regularizer_blocks(gram, gram_sq, laplacian, hyper.alpha, hyper.beta);

  KrgsModel model;
  model.kernel = kernel;
  model.train_inputs = train.inputs;
  model.hyper = hyper;
  model.state.weights = Matrix::Ones(n, m);

  Matrix prev;
  for (int iter = 1; iter <= hyper.max_iterations; ++iter) {
    SolveOutcome out =
        run_weighted_solve(regularizer, gram, train.targets,
                           model.state.weights);
    model.dual_coef = std::move(out.dual_coef);
    model.diagnostics.jitter_by_iteration.push_back(out.jitter_applied);
    model.diagnostics.jitter_count += out.jitter_applied ? 1 : 0;
    model.state.iteration = iter;
    model.diagnostics.iterations_run = iter;

    const Matrix fitted = gram * model.dual_coef;
    const double model_norm =
        model.dual_coef.cwiseProduct(fitted).sum();  // tr(Psi' K Psi)
    const double cost =
        eval_cost_l1(train, fitted, model_norm, hyper.alpha, hyper.beta);
    model.state.cost_history.push_back(cost);
    model.diagnostics.cost_history.push_back(cost);
    const Matrix weighted = weighted_targets(train.targets,
                                             model.state.weights);
    model.diagnostics.gradient_norms.push_back(
        dual_gradient(model.dual_coef, gram, laplacian, weighted,
                      model.state.weights, hyper.alpha, hyper.beta)
            .norm());

    if (observer) observer(iter, model.dual_coef);

    if (iter >= 2) {
      const double denom = std::max(prev.norm(), 1e-300);
      const double rel = (model.dual_coef - prev).norm() / denom;
      model.diagnostics.coef_rel_changes.push_back(rel);
      if (rel < hyper.tol) {
        model.diagnostics.converged = true;
        break;
      }
    }
    if (iter < hyper.max_iterations) {
      model.state.weights =
          irls_update_weights(train.targets, fitted, hyper.delta,
                              hyper.literal_delta_weights);
      prev = model.dual_coef;
    }
  }
  return model;
}

KrgsModel fit_krg(const TrainingSet& train, const KernelSpec& kernel,
                  double alpha, double beta) {
  Hyperparams hyper;
  hyper.alpha = alpha;
  hyper.beta = beta;
  hyper.delta = 1.0;  // never used: the single iteration skips reweighting
  hyper.max_iterations = 1;
  hyper.tol = 0.0;
  return fit_krgs(train, kernel, hyper);
}

Vector predict(const KrgsModel& model, const Vector& x) {
  return model.dual_coef.transpose() *
         kernel_vector(model.kernel, model.train_inputs, x);
}

Matrix predict(const KrgsModel& model, const Matrix& X) {
  require(X.cols() == model.train_inputs.cols(),
          "prediction inputs have the wrong dimension");
  return kernel_cross(model.kernel, model.train_inputs, X) * model.dual_coef;
}

double eval_cost_l1(const TrainingSet& train, const Matrix& fitted,
                    double model_norm, double alpha, double beta) {
  require(fitted.rows() == train.targets.rows() &&
              fitted.cols() == train.targets.cols(),
          "fitted values do not match the target shape");
  require(std::isfinite(model_norm) && model_norm >= 0.0,
          "model norm must be a nonnegative number");
  const double data_term = (train.targets - fitted).cwiseAbs().sum();
  const double graph_term =
      (fitted * train.graph.laplacian).cwiseProduct(fitted).sum();
  return data_term + alpha * model_norm + beta * graph_term;
}

Matrix dual_gradient(const Matrix& dual_coef, const Matrix& gram,
                     const Matrix& laplacian, const Matrix& weighted_t,
                     const Matrix& weights, double alpha, double beta) {
  const Matrix fitted = gram * dual_coef;  // K Psi
  // sum_n k_n k_n' Psi D_n^2 has (.,i) column K diag(w_i^2) (K Psi)(.,i),
  // i.e. K applied to the elementwise product of K Psi with squared weights.
  Matrix inner = fitted.cwiseProduct(weights.array().square().matrix());
  inner.noalias() += alpha * dual_coef - weighted_t;
  inner.noalias() += beta * fitted * laplacian;
  return 2.0 * (gram * inner);
}

FeatureMap FeatureMap::identity(Index input_dim) {
  return {[](const Vector& x) { return x; }, input_dim};
}

Matrix fit_lrgs_primal(const FeatureMap& features, const TrainingSet& train,
                       const Hyperparams& hyper, const Matrix& weights) {
  hyper.validate();
  require(features.dim >= 1, "feature map must have positive dimension");
  require(weights.rows() == train.targets.rows() &&
              weights.cols() == train.targets.cols(),
          "weights must be observations x nodes");
  const Index n = train.inputs.rows();
  const Index m = train.targets.cols();
  const Index f = features.dim;

  Matrix phi(n, f);
  for (Index row = 0; row < n; ++row) {
    const Vector mapped = features.phi(train.inputs.row(row).transpose());
    require(mapped.size() == f, "feature map returned the wrong dimension");
    phi.row(row) = mapped.transpose();
  }

  const Matrix phi_sq = phi.transpose() * phi;  // Phi' Phi, f x f
  Matrix system = Matrix::Zero(m * f, m * f);
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < m; ++i) {
      const double lij = hyper.beta * train.graph.laplacian(i, j);
      if (lij != 0.0) system.block(i * f, j * f, f, f) = lij * phi_sq;
    }
    const Vector wsq = weights.col(j).array().square();
    system.block(j * f, j * f, f, f).noalias() +=
        phi.transpose() * wsq.asDiagonal() * phi;
    system.block(j * f, j * f, f, f).diagonal().array() += hyper.alpha;
  }
  const Matrix weighted = weighted_targets(train.targets, weights);
  const Vector rhs = vec(phi.transpose() * weighted);
  PsdSolveResult res = solve_psd(system, rhs);
  return unvec(res.x, f, m);
}

}  // namespace krgs
