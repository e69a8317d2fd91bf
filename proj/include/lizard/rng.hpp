#pragma once

#include <cmath>
#include <cstdint>

namespace lizard {

// splitmix64 finalizer; also used to derive independent stream seeds.
inline std::uint64_t hash_mix(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t a) {
  return hash_mix(seed + 0x9E3779B97F4A7C15ULL * (a + 1));
}

inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t a,
                                   std::uint64_t b) {
  return derive_stream(derive_stream(seed, a), b);
}

// Deterministic 64-bit generator (splitmix64). Every stochastic operation
// in the library takes an explicit seed and owns one of these; independent
// streams come from derive_stream, never from sharing an instance.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Integer in [0, n), n > 0. Multiply-shift reduction; bias is O(n/2^64).
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Standard normal via Box-Muller. Always consumes exactly two draws so
  // stream positions stay predictable; no cached spare.
  double normal() {
    constexpr double two_pi = 6.283185307179586476925286766559;
    double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace lizard
