#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace krgs {

// All randomness in the library flows through this header so that a run is a
// pure function of its master seed. Every building block is pinned to a
// published algorithm: mt19937_64 is fully specified by the C++ standard,
// seed derivation is splitmix64, uniform doubles take the top 53 bits,
// normals use Box-Muller on those uniforms, and subset sampling is a partial
// Fisher-Yates shuffle. The identifier below is echoed into run metadata.
inline constexpr std::string_view kRngAlgorithmId =
    "splitmix64-derive/mt19937_64/top53-uniform/box-muller/fisher-yates/v1";

/// splitmix64 step (Steele, Lea, Flood 2014). Advances `state` and returns
/// the next output.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent stream seed from a parent seed and a tag.
/// Chaining calls (`derive_seed(derive_seed(master, a), b)`) gives the
/// per-purpose, per-trial streams used by the experiment driver.
inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag) {
  std::uint64_t state = parent ^ (0x9e3779b97f4a7c15ULL * (tag + 1));
  std::uint64_t out = splitmix64(state);
  return splitmix64(state) ^ out;
}

/// Deterministic random stream. Distributions are implemented here rather
/// than taken from <random> because the standard pins the mt19937_64 engine
/// but not the distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller. Two uniforms per draw; the paired
  /// variate is discarded to keep the stream layout obvious.
  double normal() {
    double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  /// Unbiased integer in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: empty range");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v = engine_();
    while (v >= limit) v = engine_();
    return v % n;
  }

  /// `count` distinct indices from {0, ..., pool-1}, via partial
  /// Fisher-Yates. Order of the returned indices is part of the contract
  /// only in that it is deterministic.
  std::vector<std::size_t> sample_without_replacement(std::size_t pool,
                                                      std::size_t count) {
    std::vector<std::size_t> idx(pool);
    for (std::size_t i = 0; i < pool; ++i) idx[i] = i;
    for (std::size_t j = 0; j < count && j < pool; ++j) {
      std::size_t k = j + static_cast<std::size_t>(below(pool - j));
      std::swap(idx[j], idx[k]);
    }
    idx.resize(count < pool ? count : pool);
    return idx;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace krgs
