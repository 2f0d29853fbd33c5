// Times the parallel compute kernels against the serial reference forms and
// cross-checks their outputs. Sizes are chosen so each case runs in roughly
// a second on one core.
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "krgs/graph.hpp"
#include "krgs/kernels.hpp"
#include "krgs/linalg.hpp"
#include "krgs/reference.hpp"
#include "krgs/regression.hpp"
#include "krgs/rng.hpp"

namespace {

using krgs::Index;
using krgs::Matrix;

double time_best_of(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

Matrix random_matrix(Index rows, Index cols, krgs::Rng& rng) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

void report(const std::string& name, double serial, double parallel,
            double max_diff) {
  std::printf("%-22s serial %8.4f s   parallel %8.4f s   speedup %5.2fx   max|diff| %.3g\n",
              name.c_str(), serial, parallel, serial / parallel, max_diff);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (no OpenMP)\n");
#endif
  krgs::Rng rng(2024);

  {
    const Matrix a = random_matrix(64, 64, rng);
    const Matrix b = random_matrix(40, 40, rng);
    Matrix fast, slow;
    const double tp = time_best_of(3, [&] { fast = krgs::kronecker(a, b); });
    const double ts = time_best_of(3, [&] { slow = krgs::ref::kronecker(a, b); });
    report("kronecker", ts, tp, (fast - slow).cwiseAbs().maxCoeff());
  }
  {
    const Matrix x = random_matrix(1100, 45, rng);
    const auto spec = krgs::KernelSpec::gaussian(3.0);
    Matrix fast, slow;
    const double tp = time_best_of(3, [&] { fast = krgs::kernel_matrix(spec, x); });
    const double ts = time_best_of(3, [&] { slow = krgs::ref::kernel_matrix(spec, x); });
    report("gaussian gram", ts, tp, (fast - slow).cwiseAbs().maxCoeff());
  }
  {
    const Index n = 70, m = 32;
    const Matrix x = random_matrix(n, 8, rng);
    const Matrix gram = krgs::kernel_matrix(krgs::KernelSpec::gaussian(2.0), x);
    Matrix coords(m, 2);
    for (Index i = 0; i < m; ++i) {
      coords(i, 0) = rng.uniform(55.0, 69.0);
      coords(i, 1) = rng.uniform(11.0, 24.0);
    }
    std::vector<krgs::GeoCoord> cs;
    for (Index i = 0; i < m; ++i) cs.emplace_back(coords(i, 0), coords(i, 1));
    const krgs::Graph g = krgs::build_graph(
        krgs::adjacency_from_distances(krgs::geodesic_distances(cs)));
    Matrix weights = random_matrix(n, m, rng).cwiseAbs();
    weights.array() += 0.1;
    Matrix fast, slow;
    const double tp = time_best_of(3, [&] {
      fast = krgs::assemble_dual_system(gram, g.laplacian, weights, 0.3, 0.7)
                 .system;
    });
    const double ts = time_best_of(3, [&] {
      slow = krgs::ref::assemble_dual_system(gram, g.laplacian, weights, 0.3,
                                             0.7);
    });
    report("dual system assembly", ts, tp,
           (fast - slow).cwiseAbs().maxCoeff());
  }
  {
    std::vector<krgs::GeoCoord> coords;
    for (int i = 0; i < 2200; ++i)
      coords.emplace_back(rng.uniform(-80.0, 80.0), rng.uniform(-180.0, 180.0));
    Matrix fast, slow;
    const double tp =
        time_best_of(3, [&] { fast = krgs::geodesic_distances(coords); });
    const double ts =
        time_best_of(3, [&] { slow = krgs::ref::geodesic_distances(coords); });
    report("geodesic distances", ts, tp, (fast - slow).cwiseAbs().maxCoeff());
  }
  return 0;
}
