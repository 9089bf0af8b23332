#pragma once
// Deterministic random draws.  All scenario randomness flows from a single
// seed through this generator; values depend only on the seed and the draw
// sequence, not on library-version-specific distribution internals.

#include <cstdint>
#include <random>

#include "sparse.hpp"

namespace evomax {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform in [-1, 1], built from raw bits for cross-library determinism.
  double uniform() {
    const std::uint64_t bits = eng_() >> 11;  // 53 random bits
    const double u = double(bits) * 0x1p-53;  // [0, 1)
    return 2.0 * u - 1.0;
  }

  Vec vector(std::size_t n, double amplitude = 1.0) {
    Vec v(n);
    for (auto& x : v) x = amplitude * uniform();
    return v;
  }

  // Uniform in [lo, hi].
  double range(double lo, double hi) { return lo + (uniform() + 1.0) * 0.5 * (hi - lo); }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace evomax
