#pragma once

#include <cstdint>

namespace rib::rng {

// SplitMix64 finalizer (Steele/Lea/Flood).  Full-avalanche mix of a 64-bit
// word; the generator below feeds it a Weyl sequence, which is the standard
// SplitMix64 construction expressed in counter form.
inline constexpr std::uint64_t avalanche(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

// Counter-based SplitMix64 stream.  Output k of the stream keyed by
// (seed, substream) is a pure function of (seed, substream, k); distinct
// substreams can therefore be evaluated concurrently or out of order and
// still reproduce bit-identical results.
class Stream {
 public:
  explicit Stream(std::uint64_t seed, std::uint64_t substream = 0)
      : key_(avalanche((seed + kGolden) * 0xbf58476d1ce4e5b9ull ^
                       avalanche(substream + kGolden))) {}

  std::uint64_t next_u64() { return avalanche(key_ + (++counter_) * kGolden); }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  bool bernoulli(double p) { return next_double() < p; }

  // Uniform integer in [0, m), m > 0.
  std::uint64_t below(std::uint64_t m) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * m) >> 64);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace rib::rng
