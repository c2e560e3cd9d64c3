#pragma once

#include <cstdint>

namespace qcfa {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// PCG32 (Melissa O'Neill's pcg32_random_r). Streams derived from (seed, id)
/// pairs are independent, so per-jot / per-start work is reproducible under
/// any scheduling.
class Pcg32 {
 public:
  Pcg32(std::uint64_t seed, std::uint64_t stream = 0) {
    state_ = 0;
    inc_ = (splitmix64(stream ^ 0xda3e39cb94b95bdbULL) << 1u) | 1u;
    next();
    state_ += splitmix64(seed);
    next();
  }

  std::uint32_t next() {
    const std::uint64_t old = state_;
    state_ = old * 6364136223846793005ULL + inc_;
    const std::uint32_t xorshifted = std::uint32_t(((old >> 18u) ^ old) >> 27u);
    const std::uint32_t rot = std::uint32_t(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((-rot) & 31u));
  }

  /// Uniform double in [0,1) with 53-bit resolution.
  double uniform() {
    const std::uint64_t hi = next(), lo = next();
    return double(((hi << 32) | lo) >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_ = 0;
  std::uint64_t inc_ = 1;
};

}  // namespace qcfa
