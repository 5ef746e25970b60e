#pragma once

#include <cmath>
#include <cstdint>

namespace bse {

/// Stateless 64-bit avalanche mix (murmur3 finalizer). Used to derive
/// well-separated stream keys from (seed, index) pairs.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

/// Key of the index-th substream of a parent stream. Substreams keyed this
/// way are independent of scheduling: any worker asking for (key, index)
/// gets the same stream.
constexpr std::uint64_t substream(std::uint64_t key, std::uint64_t index) noexcept {
  return mix64(key + 0x9e3779b97f4a7c15ULL * (index + 1));
}

/// SplitMix64 engine. Tiny state, O(1) seeding, passes BigCrush as a
/// 64-bit generator; ideal when millions of short-lived streams are keyed
/// per particle or per replicate.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~0ULL; }

  constexpr result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Uniform draw on the open interval (0,1); never returns 0 or 1, so it is
/// safe under log() and tan().
inline double uniform_open(SplitMix64& g) noexcept {
  return (static_cast<double>(g() >> 11) + 0.5) * 0x1.0p-53;
}

/// Uniform draw on (lo, hi), endpoints excluded.
inline double uniform_open(SplitMix64& g, double lo, double hi) noexcept {
  return lo + (hi - lo) * uniform_open(g);
}

/// Standard exponential via inversion.
inline double exponential(SplitMix64& g) noexcept { return -std::log(uniform_open(g)); }

}  // namespace bse
