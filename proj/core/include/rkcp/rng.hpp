#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace rkcp {

/// Deterministic counter-based generator: SplitMix64 (the SplittableRandom
/// finalizer of Steele, Lea & Flood). State advances by the golden-ratio
/// increment; outputs are a pure mix of the counter, so streams with
/// different seeds never interleave. All harness randomness flows through
/// this type so instances are bit-reproducible from their seed.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1), 53 mantissa bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  /// Standard normal via Box-Muller; always consumes exactly two uniforms.
  double next_normal() {
    double u1 = 1.0 - next_double();  // (0, 1]
    double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Uniform integer in [0, bound) via 128-bit multiply-shift.
  std::uint64_t next_below(std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
  }

private:
  std::uint64_t state_;
};

/// Independent child stream for a fixed purpose tag. Forking is a pure
/// function of (seed, tag), so streams are independent of draw order.
inline SplitMix64 fork_stream(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed ^ (0x632be59bd9b4e019ull * (tag + 1));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return SplitMix64(z ^ (z >> 31));
}

}  // namespace rkcp
