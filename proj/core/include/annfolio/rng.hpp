#pragma once

#include <cstdint>
#include <utility>

namespace annfolio {

/// SplitMix64 output function. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent child seed for substream `stream` of `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return mix64(mix64(seed ^ 0x6a09e667f3bcc909ULL) + 0x9e3779b97f4a7c15ULL * (stream + 1));
}

/// Counter-addressable random stream.
///
/// Word `i` of stream `key` is SplitMix64 jumped to position `i`, so any
/// element can be regenerated without touching its predecessors. This is
/// what lets a path (or a single step of it) be rebuilt from
/// (seed, path, step) alone.
class CounterStream {
 public:
  constexpr explicit CounterStream(std::uint64_t key) noexcept : key_(key) {}

  constexpr std::uint64_t key() const noexcept { return key_; }

  constexpr std::uint64_t word(std::uint64_t counter) const noexcept {
    return mix64(key_ + 0x9e3779b97f4a7c15ULL * (counter + 1));
  }

  /// Uniform on [0, 1) with 53 random bits.
  constexpr double uniform(std::uint64_t counter) const noexcept {
    return static_cast<double>(word(counter) >> 11) * 0x1.0p-53;
  }

  /// Two independent standard normals from words 2c and 2c+1 (Box-Muller).
  std::pair<double, double> normal_pair(std::uint64_t counter) const noexcept;

 private:
  std::uint64_t key_;
};

/// Sequential adaptor over a CounterStream, for places that just want "the
/// next normal" (parameter init, synthetic data).
class NormalSequence {
 public:
  explicit NormalSequence(std::uint64_t seed) noexcept : stream_(derive_seed(seed, 0)) {}

  double next() noexcept;

 private:
  CounterStream stream_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace annfolio
