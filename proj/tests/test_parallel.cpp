#include <doctest.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <vector>

#include "krgs/experiment.hpp"
#include "krgs/reference.hpp"
#include "krgs/regression.hpp"
#include "testutil.hpp"

using namespace krgs;

namespace {

void set_threads(int n) {
#ifdef _OPENMP
  omp_set_num_threads(n);
#else
  (void)n;
#endif
}

int saved_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace

TEST_CASE("parallel kernels agree with the serial reference forms") {
  Rng rng(801);
  for (int c = 0; c < 30; ++c) {
    const Index n = 2 + Index(rng.below(10));
    const Matrix a = tu::random_matrix(rng, 2 + Index(rng.below(5)),
                                       2 + Index(rng.below(5)));
    const Matrix b = tu::random_matrix(rng, 2 + Index(rng.below(5)),
                                       2 + Index(rng.below(5)));
    CHECK(kronecker(a, b) == ref::kronecker(a, b));

    const Matrix x = tu::random_matrix(rng, n, 3);
    const KernelSpec spec = KernelSpec::gaussian(1.1);
    CHECK(tu::rel_diff(kernel_matrix(spec, x), ref::kernel_matrix(spec, x)) <=
          1e-12);

    const auto coords = tu::random_coords(rng, n);
    const Matrix dist = geodesic_distances(coords);
    CHECK((dist - ref::geodesic_distances(coords)).cwiseAbs().maxCoeff() <=
          1e-9);
    CHECK(tu::rel_diff(adjacency_from_distances(dist),
                       ref::adjacency_from_distances(dist)) <= 1e-12);
  }
}

TEST_CASE("results do not depend on the thread count") {
  const int saved = saved_threads();
  Rng rng(802);
  const Matrix a = tu::random_matrix(rng, 17, 9);
  const Matrix b = tu::random_matrix(rng, 7, 11);
  const Matrix x = tu::random_matrix(rng, 40, 3);
  const TrainingSet train = tu::random_training(rng, 12, 5, 2);
  Hyperparams hyper;
  hyper.alpha = 0.2;
  hyper.beta = 0.1;
  hyper.max_iterations = 3;
  hyper.tol = 0.0;
  const Matrix weights = tu::random_weights(rng, 12, 5);

  ExperimentConfig config;
  config.synth.nodes = 6;
  config.synth.days = 16;
  config.synth.bandwidth = 2;
  config.n_train = 8;
  config.sigma_grid = {1.5};
  config.alpha_grid = {0.1};
  config.beta_grid = {0.01};
  config.trials = 2;
  config.max_iterations = 2;
  config.seed = 23;

  struct Snapshot {
    Matrix kron, gram, dual, system;
    std::vector<double> nmse;
  };
  auto run_all = [&]() {
    Snapshot s;
    s.kron = kronecker(a, b);
    s.gram = kernel_matrix(KernelSpec::gaussian(0.9), x);
    s.dual = fit_krgs(train, KernelSpec::gaussian(1.0), hyper).dual_coef;
    s.system = assemble_dual_system(kernel_matrix(KernelSpec::gaussian(1.0),
                                                  train.inputs),
                                    train.graph.laplacian, weights, 0.3, 0.2)
                   .system;
    for (const McRow& r : monte_carlo_experiment(config).rows)
      s.nmse.push_back(r.nmse_db);
    return s;
  };

  set_threads(1);
  const Snapshot serial = run_all();
  set_threads(4);
  const Snapshot parallel = run_all();
  set_threads(saved);

  CHECK(serial.kron == parallel.kron);
  CHECK(serial.gram == parallel.gram);
  CHECK(serial.dual == parallel.dual);
  CHECK(serial.system == parallel.system);
  REQUIRE(serial.nmse.size() == parallel.nmse.size());
  for (std::size_t i = 0; i < serial.nmse.size(); ++i)
    CHECK(serial.nmse[i] == parallel.nmse[i]);
}
