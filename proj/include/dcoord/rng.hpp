#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <vector>

namespace dcoord {

/// SplitMix64 step (Steele, Lea & Vigna). Advances `state` and returns the
/// next output. Used for seed expansion and for combining seeds, never as
/// the simulation generator itself.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Hashes a (base, index) pair into a fresh 64-bit seed. Both inputs go
/// through SplitMix64 so nearby run indices yield unrelated streams.
inline std::uint64_t mix_seeds(std::uint64_t base, std::uint64_t index) {
  std::uint64_t s = base;
  std::uint64_t h = splitmix64(s);
  s = h ^ index;
  return splitmix64(s);
}

/// xoshiro256** 1.0 (Blackman & Vigna), seeded through SplitMix64.
///
/// All randomness in the library flows through this class so that results
/// are reproducible bit-for-bit across platforms; the standard <random>
/// distributions are avoided on purpose, as their outputs are
/// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    for (auto& word : state_) word = splitmix64(seed);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Unbiased uniform draw in [0, bound). bound must be >= 1.
  std::uint64_t below(std::uint64_t bound) {
    // Rejection over the largest multiple of bound (arc4random_uniform
    // scheme): threshold = 2^64 mod bound.
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  /// Uniform draw in [lo, hi], both ends included.
  std::uint64_t range(std::uint64_t lo, std::uint64_t hi) {
    return lo + below(hi - lo + 1);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return unit() < p; }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  /// Samples k distinct indices from [0, m) by partial Fisher-Yates.
  /// When k >= m the full index range is returned in order and no random
  /// draws are consumed.
  void sample_indices(std::uint32_t m, std::uint32_t k,
                      std::vector<std::uint32_t>& out) {
    out.resize(m);
    for (std::uint32_t i = 0; i < m; ++i) out[i] = i;
    if (k >= m) return;
    for (std::uint32_t i = 0; i < k; ++i) {
      const auto j = i + static_cast<std::uint32_t>(below(m - i));
      std::swap(out[i], out[j]);
    }
    out.resize(k);
  }

  // UniformRandomBitGenerator interface.
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() { return next_u64(); }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
};

}  // namespace dcoord
