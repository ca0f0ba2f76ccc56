#pragma once

#include <cstdint>

namespace rdlab {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent seed from a master seed and a salt.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t salt) noexcept {
  return mix64(mix64(master) ^ (salt * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL));
}

/// Counter-based uniform generator.  Draw `i` of stream `(seed, index)` is
/// `mix64(key + (i + 1) * golden)`, so any draw is a pure function of the
/// triple and streams can be evaluated on any thread in any order.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream_index) noexcept
      : seed_(seed), index_(stream_index), key_(derive_seed(seed, stream_index)) {}

  std::uint64_t next_u64() noexcept { return mix64(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi].
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::uint64_t stream_index() const noexcept { return index_; }
  [[nodiscard]] std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t index_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace rdlab
