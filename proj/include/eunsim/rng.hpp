#pragma once

#include <cstdint>
#include <random>

namespace eunsim {

// Seed derivation and uniform/normal draws built on mt19937_64 with manual
// bit-to-double conversion. std::uniform_real_distribution and
// std::normal_distribution are implementation-defined, so every draw that can
// reach an output file goes through this class instead.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // [0, 1) with 53-bit resolution
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // [0, n), n > 0
  std::uint64_t uniform_int(std::uint64_t n) {
    // rejection sampling keeps the draw unbiased
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return x % n;
  }

  // Box-Muller, one normal per call (two uniforms consumed)
  double normal() {
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  std::uint64_t raw() { return eng_(); }

  // SplitMix64-style hash chain for deriving independent substreams from a
  // master seed. derive(s, a) != derive(s, b) for a != b with high probability.
  static std::uint64_t derive(std::uint64_t master, std::uint64_t a,
                              std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t x = master;
    for (std::uint64_t salt : {a, b, c}) {
      x += 0x9e3779b97f4a7c15ull + salt;
      x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
      x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
      x = x ^ (x >> 31);
    }
    return x;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace eunsim
