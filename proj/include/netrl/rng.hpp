#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

// Deterministic random streams. One master seed drives every source of
// randomness in a run; each consumer (traffic per flow, multipath hop
// sampling, network init, OU noise, replay sampling, random baseline) gets
// its own substream derived from (seed, tag, a, b), so no consumer can
// perturb another's sequence.
//
// Derivation: seed and ids are folded through SplitMix64 and the result
// seeds a std::mt19937_64 (whose sequence the C++ standard fully specifies).
// All samplers are hand-rolled on top of raw engine output, never on
// std::*_distribution, so sequences do not depend on the standard library
// implementation.

namespace netrl {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

class RngStream {
 public:
  RngStream() : RngStream(0, "default") {}

  RngStream(std::uint64_t seed, std::string_view tag, std::uint64_t a = 0,
            std::uint64_t b = 0)
      : engine_(derive(seed, tag, a, b)) {}

  static std::uint64_t derive(std::uint64_t seed, std::string_view tag,
                              std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t z = splitmix64(seed ^ fnv1a(tag));
    z = splitmix64(z ^ a);
    z = splitmix64(z ^ b);
    return z;
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Exponential with the given mean.
  double exponential(double mean) { return -mean * std::log1p(-uniform()); }

  // Standard normal, Box-Muller with one cached value.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(kTwoPi * u2);
    has_spare_ = true;
    return r * std::cos(kTwoPi * u2);
  }

  // Uniform integer in [0, n), n > 0.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(engine_()) * n) >> 64);
  }

 private:
  static constexpr double kTwoPi = 6.283185307179586476925286766559;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace netrl
