#pragma once

#include <cmath>
#include <cstdint>

// Deterministic splittable RNG used by every sampler in the library.
//
// The base generator is SplitMix64: a Weyl sequence with increment
// 0x9E3779B97F4A7C15 pushed through a 64-bit finalizer. Substream k of master
// seed s starts from state finalize(finalize(s) ^ finalize(k + increment)),
// which scatters the streams across the generator's single 2^64 cycle so that
// windows drawn by different (seed, index) pairs do not collide in practice.
// Trial k of a seeded experiment therefore sees the same stream no matter
// which worker runs it.
//
// Gaussian variates use the Marsaglia polar method. The draw order is fixed:
// generated fixtures and golden files depend on it, so any change here is a
// format break.

namespace reaper {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // Independent stream `index` derived from `seed`; see the note above.
  static Rng substream(std::uint64_t seed, std::uint64_t index) {
    return Rng(finalize(finalize(seed) ^ finalize(index + kGolden)));
  }

  std::uint64_t next_u64() {
    state_ += kGolden;
    return finalize(state_);
  }

  // Uniform on [0, 1) with 53 random bits.
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via the polar method; the rejected-pair loop consumes a
  // variable number of uniforms, and the second variate of each accepted pair
  // is cached for the next call.
  double next_gaussian() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    while (true) {
      const double u = 2.0 * next_uniform() - 1.0;
      const double v = 2.0 * next_uniform() - 1.0;
      const double s = u * u + v * v;
      if (s > 0.0 && s < 1.0) {
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        cached_ = v * f;
        has_cached_ = true;
        return u * f;
      }
    }
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

  static std::uint64_t finalize(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace reaper
