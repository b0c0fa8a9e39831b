#pragma once

#include <cstdint>
#include <random>

namespace aim {

// Seeded random stream. The engine is std::mt19937_64, whose output sequence
// is fixed by the standard; the draws below are built directly on the raw
// 64-bit output so results do not depend on the standard library's
// distribution implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, n). Rejection sampling, no modulo bias.
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n <= 1) {
      engine_();
      return 0;
    }
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  // Uniform double in [0, 1) with 53 bits of resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform double in [lo, hi].
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

private:
  std::mt19937_64 engine_;
};

}  // namespace aim
