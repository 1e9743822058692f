#pragma once

// Reproducible seeding. A single 64-bit seed expands into independent
// per-run streams; every draw is defined bit-exactly here so runs agree
// across platforms and standard libraries.

#include <cstdint>
#include <numbers>

namespace gkdv {

/// SplitMix64 (Steele, Lea, Flood). Reference vector: seed 0 yields
/// 0xe220a8397b1dcdaf, 0x6e789e6aa1b965f4, 0x06c45d188009454f.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double phase() { return 2.0 * std::numbers::pi * uniform(); }

 private:
  std::uint64_t state_;
};

/// Seed of stream `index` derived from `seed`: the (index+1)-th SplitMix64
/// output of `seed`, computed in O(1).
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
  SplitMix64 g(seed + index * 0x9e3779b97f4a7c15ULL);
  return g.next();
}

}  // namespace gkdv
