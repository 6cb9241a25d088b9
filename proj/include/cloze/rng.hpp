#pragma once

#include <array>
#include <cstdint>

namespace cloze {

// Trial streams must replay bit-for-bit in any language, so the generator and
// every derived draw are spelled out here rather than delegated to
// <random> distributions, whose outputs are implementation-defined.
//
//   seeding:      four successive SplitMix64 outputs from the seed
//   core:         xoshiro256** (Blackman & Vigna)
//   below(n):     reject r < (2^64 - n) mod n, return r mod n
//   uniform01():  (next() >> 11) * 2^-53
//   coin():       top bit of next()
//   derive(b, k): mix64(b ^ mix64(k)), mix64 being one SplitMix64 step
//                 from state x

constexpr std::uint64_t mix64(std::uint64_t x) {
  std::uint64_t z = x + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t key) {
  return mix64(base ^ mix64(key));
}

class Rng {
 public:
  explicit constexpr Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) {
      word = mix64(sm);
      sm += 0x9E3779B97F4A7C15ULL;
    }
  }

  constexpr std::uint64_t next() {
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

  // Uniform integer in [0, n). n must be positive.
  constexpr std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  constexpr double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  constexpr bool coin() { return (next() >> 63) != 0; }

  constexpr bool bernoulli(double p) { return uniform01() < p; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::array<std::uint64_t, 4> state_{};
};

}  // namespace cloze
