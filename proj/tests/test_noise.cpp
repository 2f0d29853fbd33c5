#include <doctest.h>

#include <cmath>

#include "krgs/noise.hpp"
#include "testutil.hpp"

using namespace krgs;

TEST_CASE("fraction endpoints") {
  Rng rng(501);
  const Matrix clean = tu::random_matrix(rng, 6, 9);
  Rng r0(1);
  CHECK(inject_missing(clean, 0.0, r0) == clean);
  Rng r1(1);
  CHECK(inject_missing(clean, 1.0, r1) == Matrix::Zero(6, 9));
  Rng r2(1);
  CHECK(inject_scaling(clean, 0.0, 4.0, r2) == clean);
  Rng r3(1);
  CHECK(inject_scaling(clean, 1.0, 1.0, r3) == clean);  // factor 1 is a no-op
}

TEST_CASE("a quarter of 44 nodes rounds to 11 zeroed entries per row") {
  Rng rng(502);
  const Matrix clean = Matrix::Ones(5, 44);
  Rng noise_rng(77);
  const Matrix corrupted = inject_missing(clean, 0.25, noise_rng);
  for (Index n = 0; n < clean.rows(); ++n) {
    Index zeroed = 0;
    for (Index i = 0; i < clean.cols(); ++i)
      if (corrupted(n, i) == 0.0) ++zeroed;
    CHECK(zeroed == 11);
  }
}

TEST_CASE("per-row corruption count is exactly round(fraction * M)") {
  Rng rng(503);
  for (int c = 0; c < 120; ++c) {
    const Index n = 1 + Index(rng.below(6));
    const Index m = 1 + Index(rng.below(40));
    const double fraction = rng.uniform(0.0, 1.0);
    const Index expected = Index(std::llround(fraction * double(m)));
    // Nonzero entries so a zeroed entry is always detectable.
    const Matrix clean = tu::random_uniform(rng, n, m, 0.5, 2.0);
    Rng noise_rng(rng.next_u64());
    const Matrix corrupted = inject_missing(clean, fraction, noise_rng);
    for (Index row = 0; row < n; ++row) {
      Index changed = 0;
      for (Index i = 0; i < m; ++i)
        if (corrupted(row, i) != clean(row, i)) {
          ++changed;
          CHECK(corrupted(row, i) == 0.0);
        } else {
          // untouched entries are bit-identical by construction of the check
        }
      CHECK(changed == expected);
    }
  }
}

TEST_CASE("scaling multiplies the chosen entries and nothing else") {
  Rng rng(504);
  for (int c = 0; c < 60; ++c) {
    const Index n = 1 + Index(rng.below(5));
    const Index m = 2 + Index(rng.below(20));
    const double fraction = rng.uniform(0.1, 0.9);
    const Index expected = Index(std::llround(fraction * double(m)));
    const Matrix clean = tu::random_uniform(rng, n, m, 0.5, 2.0);
    Rng noise_rng(rng.next_u64());
    const Matrix corrupted = inject_scaling(clean, fraction, 4.0, noise_rng);
    for (Index row = 0; row < n; ++row) {
      Index changed = 0;
      for (Index i = 0; i < m; ++i)
        if (corrupted(row, i) != clean(row, i)) {
          ++changed;
          CHECK(corrupted(row, i) == 4.0 * clean(row, i));
        }
      CHECK(changed == expected);
    }
  }
  Matrix two(1, 1);
  two << 2.0;
  Rng noise_rng(9);
  CHECK(inject_scaling(two, 1.0, 4.0, noise_rng)(0, 0) == 8.0);
}

TEST_CASE("apply_noise is a pure function of the spec") {
  Rng rng(505);
  const Matrix clean = tu::random_matrix(rng, 8, 20);
  NoiseSpec spec;
  spec.kind = NoiseKind::kScaling;
  spec.fraction = 0.3;
  spec.scale_factor = 2.5;
  spec.seed = 424242;
  const Matrix a = apply_noise(clean, spec);
  const Matrix b = apply_noise(clean, spec);
  CHECK(a == b);
  spec.seed = 424243;
  CHECK(apply_noise(clean, spec) != a);

  spec.kind = NoiseKind::kMissing;
  const Matrix c = apply_noise(clean, spec);
  CHECK(c != a);
  NoiseSpec bad = spec;
  bad.fraction = 1.5;
  CHECK_THROWS_AS(apply_noise(clean, bad), std::invalid_argument);
  bad = spec;
  bad.fraction = -0.1;
  CHECK_THROWS_AS(apply_noise(clean, bad), std::invalid_argument);
}

TEST_CASE("snr_db frozen values") {
  Rng rng(506);
  const Matrix clean = tu::random_matrix(rng, 4, 4);
  CHECK(snr_db(clean, clean) == std::numeric_limits<double>::infinity());

  // Error energy equal to signal energy: 0 dB.
  const Matrix doubled = 2.0 * clean;
  CHECK(snr_db(clean, doubled) == doctest::Approx(0.0).epsilon(1e-12));

  // All-ones 4x4 with one entry zeroed: 10 log10(16 / 1).
  Matrix ones = Matrix::Ones(4, 4);
  Matrix one_out = ones;
  one_out(2, 1) = 0.0;
  CHECK(snr_db(ones, one_out) ==
        doctest::Approx(12.041199826559248).epsilon(1e-12));

  CHECK_THROWS_AS(snr_db(Matrix::Zero(3, 3), Matrix::Ones(3, 3)),
                  std::invalid_argument);
}
