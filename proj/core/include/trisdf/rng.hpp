#pragma once

#include <cmath>
#include <cstdint>

namespace trisdf {

// Counter-based splitmix64 stream. The standard <random> engines are
// bit-stable but the distributions are implementation-defined, so all
// sampling goes through this generator to keep outputs reproducible
// across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // Derive an independent stream for (seed, a, b, ...) without sharing
  // state with the parent. Used to give every ray/view/repeat its own
  // generator.
  static Rng stream(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0) {
    Rng r(seed);
    r.state_ ^= mix(a + 0x9e3779b97f4a7c15ULL);
    r.state_ ^= mix(b + 0x7f4a7c159e3779b9ULL);
    r.next_u64();
    return r;
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  // Standard normal via Box-Muller.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace trisdf
