#pragma once

// Seeded random streams with named sub-streams.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the
// standard. The std:: distributions are not (their algorithms are
// implementation-defined), so every variate transform used by the simulator
// lives here and depends only on the raw 64-bit engine output.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

namespace anchorite {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : key_(detail::splitmix64(seed)), engine_(seed_sequence(key_)) {}

  /// Independent stream for a named concern. Deriving never advances this stream.
  [[nodiscard]] RngStream substream(std::string_view label) const {
    return RngStream(Key{detail::splitmix64(key_ ^ detail::fnv1a64(label))});
  }

  /// Independent stream for item `index` of a named concern (one per time step, chunk, ...).
  [[nodiscard]] RngStream substream(std::string_view label, std::uint64_t index) const {
    const auto k = detail::splitmix64(key_ ^ detail::fnv1a64(label));
    return RngStream(Key{detail::splitmix64(k + detail::splitmix64(index + 1))});
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Unbiased integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  bool coin() { return (engine_() >> 63) != 0; }

  /// Standard normal by Box-Muller (both outputs used).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  double exponential(double rate) {
    double u;
    do {
      u = uniform();
    } while (u <= 0.0);
    return -std::log(u) / rate;
  }

  /// Poisson variate: sequential inversion for small means, PTRS
  /// (transformed rejection with squeeze, Hormann 1993) otherwise.
  std::uint64_t poisson(double mean) {
    if (!(mean > 0.0)) return 0;
    if (mean < 10.0) {
      double p = std::exp(-mean);
      double cdf = p;
      const double u = uniform();
      std::uint64_t k = 0;
      while (u > cdf && k < 1000) {
        ++k;
        p *= mean / static_cast<double>(k);
        cdf += p;
      }
      return k;
    }
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
      const double u = uniform() - 0.5;
      const double v = uniform();
      const double us = 0.5 - std::fabs(u);
      const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
      if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
      if (k < 0.0 || (us < 0.013 && v > us)) continue;
      if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
          -mean + k * loglam - std::lgamma(k + 1.0)) {
        return static_cast<std::uint64_t>(k);
      }
    }
  }

 private:
  struct Key {
    std::uint64_t value;
  };
  explicit RngStream(Key k) : key_(k.value), engine_(seed_sequence(key_)) {}

  static std::mt19937_64::result_type seed_sequence(std::uint64_t key) { return detail::splitmix64(key ^ 0x5851f42d4c957f2dULL); }

  std::uint64_t key_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace anchorite
