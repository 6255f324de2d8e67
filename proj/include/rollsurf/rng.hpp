#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

namespace rollsurf {

// FNV-1a over raw bytes; used for seed derivation and config digests.
constexpr std::uint64_t fnv1a(std::string_view bytes,
                              std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Splitmix64 finalizer; folds one more word into a running seed.
inline std::uint64_t mix_seed(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  std::uint64_t z = h;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t h, std::string_view tag) {
  return mix_seed(h, fnv1a(tag));
}

// Deterministic RNG stream. Distributions are hand-rolled on top of the
// raw mt19937_64 words so output is identical across standard libraries.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // in [0, 1)
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Box-Muller, two uniforms per draw (no cached spare, so consumption per
  // call is fixed and streams never depend on call history).
  double gaussian(double sigma) {
    if (sigma == 0.0) {
      gen_();
      gen_();
      return 0.0;
    }
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    return sigma * std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  // Unbiased integer in [0, n) by rejection.
  std::size_t uniform_index(std::size_t n) {
    if (n <= 1) {
      gen_();
      return 0;
    }
    const std::uint64_t span = n;
    const std::uint64_t limit = std::uint64_t(-1) - (std::uint64_t(-1) % span);
    std::uint64_t x = gen_();
    while (x >= limit) x = gen_();
    return static_cast<std::size_t>(x % span);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace rollsurf
