#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace demix {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// SplitMix64 output finalizer.
constexpr std::uint64_t splitmix64_finalize(std::uint64_t s) noexcept {
  s ^= s >> 30;
  s *= 0xBF58476D1CE4E5B9ULL;
  s ^= s >> 27;
  s *= 0x94D049BB133111EBULL;
  s ^= s >> 31;
  return s;
}

/// Counter-based per-sample seed: finalize(master ^ ordinal * golden_gamma).
constexpr std::uint64_t derive_sample_seed(std::uint64_t master_seed,
                                           std::uint64_t sample_ordinal) noexcept {
  return splitmix64_finalize(master_seed ^ (sample_ordinal * kGoldenGamma));
}

/// xorshift64* generator (shifts 12/25/27, multiplier 0x2545F4914F6CDD1D).
/// A zero seed is replaced by the golden gamma since zero is a fixed point.
class Xorshift64Star {
public:
  using result_type = std::uint64_t;

  explicit constexpr Xorshift64Star(std::uint64_t seed) noexcept
      : state_(seed == 0 ? kGoldenGamma : seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  constexpr result_type operator()() noexcept {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545F4914F6CDD1DULL;
  }

  /// Uniform double in [0,1) from the top 53 bits.
  constexpr double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

private:
  std::uint64_t state_;
};

namespace detail {

// Standard normal by Box-Muller; consumes exactly two uniforms.
inline double standard_normal(Xorshift64Star& rng) {
  const double u1 = 1.0 - rng.uniform();  // (0,1]
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Gamma(shape, 1) by Marsaglia-Tsang; shape < 1 uses the u^(1/shape) boost.
inline double standard_gamma(Xorshift64Star& rng, double shape) {
  if (shape < 1.0) {
    const double g = standard_gamma(rng, shape + 1.0);
    const double u = 1.0 - rng.uniform();
    return g * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = standard_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

} // namespace detail

/// Symmetric Beta(alpha, alpha) draw.
inline double sample_beta(Xorshift64Star& rng, double alpha) {
  const double a = detail::standard_gamma(rng, alpha);
  const double b = detail::standard_gamma(rng, alpha);
  if (a + b == 0.0) return 0.5;
  return a / (a + b);
}

} // namespace demix
