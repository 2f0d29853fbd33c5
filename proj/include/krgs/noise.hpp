#pragma once

#include <cstdint>

#include "krgs/linalg.hpp"
#include "krgs/rng.hpp"

namespace krgs {

enum class NoiseKind { kMissing, kScaling };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::kMissing;
  double fraction = 0.25;     // share of nodes corrupted per observation
  double scale_factor = 4.0;  // scaling kind only
  std::uint64_t seed = 0;

  void validate() const;
};

/// Per row, zeroes round(fraction * M) distinct uniformly chosen columns.
/// Subsets are drawn independently across rows; untouched entries are
/// bit-identical to the input.
Matrix inject_missing(const Matrix& clean, double fraction, Rng& rng);

/// Same subset mechanics; chosen entries are multiplied by factor.
Matrix inject_scaling(const Matrix& clean, double fraction, double factor,
                      Rng& rng);

/// Applies spec.kind with an Rng seeded from spec.seed.
Matrix apply_noise(const Matrix& clean, const NoiseSpec& spec);

/// 10 log10(||clean||_F^2 / ||corrupted - clean||_F^2); +infinity when the
/// matrices are identical. Throws if clean is all zeros.
double snr_db(const Matrix& clean, const Matrix& corrupted);

}  // namespace krgs
