#pragma once

#include <cstdint>

namespace tgforge {

/// SplitMix64 (Steele, Lea, Flood 2014). Layout seeds refer to this exact
/// sequence.
class SplitMix64 {
public:
  explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

  constexpr std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) using the top 53 bits.
  constexpr double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform in [-1, 1).
  constexpr double symmetric() { return 2.0 * uniform() - 1.0; }

private:
  std::uint64_t state_;
};

} // namespace tgforge
