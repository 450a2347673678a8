#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>

namespace rsr {

// Deterministic random source. std::mt19937_64 has a standard-mandated output
// sequence, and all distributions here are implemented locally, so a given
// seed produces the same stream on every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Derives an independent child seed from (master, stream indices) via
  // splitmix64, so parallel trials can own disjoint streams.
  static std::uint64_t derive(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t x = master;
    x = splitmix(x + 0x9E3779B97F4A7C15ull * (a + 1));
    x = splitmix(x + 0x9E3779B97F4A7C15ull * (b + 1));
    return x;
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, bound), bound >= 1. Rejection sampling keeps the
  // result unbiased and platform-independent.
  std::uint64_t uniform_index(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % bound;
  }

  // Standard normal via Box-Muller; one spare value is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * kPi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  template <typename Container>
  void shuffle(Container& c) {
    for (std::size_t i = c.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(c[i - 1], c[j]);
    }
  }

 private:
  static constexpr double kPi = 3.14159265358979323846;

  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rsr
