#include "krgs/noise.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace krgs {
namespace {

void check_fraction(double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0))
    throw std::invalid_argument("noise fraction must lie in [0, 1]");
}

// round(fraction * M), half away from zero; both operands nonnegative here.
Index subset_size(double fraction, Index m) {
  return static_cast<Index>(std::llround(fraction * static_cast<double>(m)));
}

template <typename EntryOp>
Matrix corrupt_rows(const Matrix& clean, double fraction, Rng& rng,
                    EntryOp&& op) {
  const Index m = clean.cols();
  const Index count = subset_size(fraction, m);
  Matrix out = clean;
  for (Index row = 0; row < clean.rows(); ++row) {
    const auto picked = rng.sample_without_replacement(
        static_cast<std::size_t>(m), static_cast<std::size_t>(count));
    for (std::size_t col : picked) op(out(row, static_cast<Index>(col)));
  }
  return out;
}

}  // namespace

void NoiseSpec::validate() const {
  check_fraction(fraction);
  if (kind == NoiseKind::kScaling && !std::isfinite(scale_factor))
    throw std::invalid_argument("noise scale factor must be finite");
}

Matrix inject_missing(const Matrix& clean, double fraction, Rng& rng) {
  check_fraction(fraction);
  return corrupt_rows(clean, fraction, rng, [](double& v) { v = 0.0; });
}

Matrix inject_scaling(const Matrix& clean, double fraction, double factor,
                      Rng& rng) {
  check_fraction(fraction);
  if (!std::isfinite(factor))
    throw std::invalid_argument("noise scale factor must be finite");
  return corrupt_rows(clean, fraction, rng, [factor](double& v) { v *= factor; });
}

Matrix apply_noise(const Matrix& clean, const NoiseSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  if (spec.kind == NoiseKind::kMissing)
    return inject_missing(clean, spec.fraction, rng);
  return inject_scaling(clean, spec.fraction, spec.scale_factor, rng);
}

double snr_db(const Matrix& clean, const Matrix& corrupted) {
  if (clean.rows() != corrupted.rows() || clean.cols() != corrupted.cols())
    throw std::invalid_argument("snr_db: shape mismatch");
  const double signal = clean.squaredNorm();
  if (signal == 0.0)
    throw std::invalid_argument("snr_db: clean signal is all zeros");
  const double noise = (corrupted - clean).squaredNorm();
  if (noise == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(signal / noise);
}

}  // namespace krgs
