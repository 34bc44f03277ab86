// src/core/rng.h
//
// Seeded RNG with hand-rolled distributions so that streams are reproducible
// bit-for-bit regardless of the standard library's distribution internals.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace zs::core {

class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), engine_(splitmix(seed)) {}

  uint64_t seed() const { return seed_; }

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi] inclusive.
  int64_t uniform_int(int64_t lo, int64_t hi) {
    return lo + static_cast<int64_t>(uniform() * static_cast<double>(hi - lo + 1));
  }

  // Standard normal via Box-Muller; one draw per call, no caching, so the
  // stream position is easy to reason about.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  bool bernoulli(double p) { return uniform() < p; }

  // Derives an independent deterministic stream from this rng's seed and a
  // tag, e.g. rng.child("dropout"). Does not advance this rng.
  Rng child(std::string_view tag) const {
    uint64_t h = 0xcbf29ce484222325ull;
    for (char c : tag) {
      h ^= static_cast<uint8_t>(c);
      h *= 0x100000001b3ull;
    }
    return Rng(splitmix(seed_) ^ h);
  }

  Rng child(uint64_t salt) const { return Rng(splitmix(seed_ ^ splitmix(salt))); }

 private:
  static uint64_t splitmix(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace zs::core
