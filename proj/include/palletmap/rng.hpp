#pragma once

#include <cmath>
#include <cstdint>

namespace palletmap {

// splitmix64. Fixed constants so outputs are reproducible across
// platforms and standard-library implementations.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  // Uniform integer in [0, n), n > 0.
  std::uint64_t next_below(std::uint64_t n) {
    // Modulo bias is negligible for the n used here (pixel counts, indices).
    return next_u64() % n;
  }

  // Standard normal via Box-Muller.
  double next_normal() {
    double u1 = next_double();
    double u2 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
  }

  // Derive an independent stream, e.g. per image id.
  static SplitMix64 derive(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 mix(seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1)));
    mix.next_u64();
    return mix;
  }

 private:
  std::uint64_t state_;
};

}  // namespace palletmap
