#pragma once

#include <cmath>
#include <cstdint>

namespace figsim {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic generator with hand-rolled draws. The standard <random>
// distributions are not pinned across library implementations, so every draw
// here is spelled out to keep traces and eviction sequences byte-stable.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    // xoshiro256** state, seeded through splitmix64.
    uint64_t x = seed;
    for (auto& word : state_) {
      x = splitmix64(x);
      word = x;
    }
  }

  uint64_t next() {
    const uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, bound). Rejection keeps it unbiased.
  uint64_t bounded(uint64_t bound) {
    if (bound <= 1) return 0;
    const uint64_t threshold = -bound % bound;
    for (;;) {
      uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

  // Uniform in [0, 1).
  double real() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool chance(double p) { return real() < p; }

  // Geometric number of failures before a success, success probability p.
  // Mean (1-p)/p.
  uint64_t geometric(double p) {
    if (p >= 1.0) return 0;
    double u = real();
    if (u <= 0.0) u = 0x1.0p-53;
    return static_cast<uint64_t>(std::floor(std::log(u) / std::log1p(-p)));
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  uint64_t state_[4];
};

}  // namespace figsim
