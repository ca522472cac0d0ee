#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace xaug {

/// SplitMix64 finalizer; used to derive independent child seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a) noexcept {
  return mix64(seed ^ mix64(a + 0x632BE59BD9B4E019ULL));
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept {
  return derive_seed(derive_seed(seed, a), b);
}

/// Deterministic random stream. The engine sequence is fixed by the standard;
/// the real-valued conversions are done here so results do not depend on the
/// standard library's distribution implementations.
class SeedStream {
public:
  explicit SeedStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the closed interval [0, 1].
  double unit_closed() {
    constexpr double kScale = 1.0 / static_cast<double>((std::uint64_t{1} << 53) - 1);
    return static_cast<double>(engine_() >> 11) * kScale;
  }

  /// Uniform on the half-open interval [0, 1).
  double unit_open() {
    constexpr double kScale = 1.0 / static_cast<double>(std::uint64_t{1} << 53);
    return static_cast<double>(engine_() >> 11) * kScale;
  }

  /// Uniform on the closed interval [lo, hi]; lo == hi yields lo exactly.
  double uniform(double lo, double hi) {
    const double u = unit_closed();
    if (lo == hi) return lo;
    const double v = lo + (hi - lo) * u;
    return v > hi ? hi : v;
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : engine_() % n; }

  /// Standard normal via Box-Muller.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = unit_open();
    while (u1 <= 0.0) u1 = unit_open();
    const double u2 = unit_open();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace xaug
