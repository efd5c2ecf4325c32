#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace su2lab {

/// Identifies one random stream: the polynomial of trial `trial_index` in
/// an experiment keyed by `master_seed`.
struct RngSeed {
  std::uint64_t master_seed = 0;
  std::uint64_t trial_index = 0;

  friend bool operator==(const RngSeed&, const RngSeed&) = default;
};

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// SplitMix64 output finalizer (Steele, Lea & Flood).
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-based SplitMix64 stream.
///
/// The stream key is derived from (master_seed, trial_index); draw number n
/// is mix(key + (n + 1) * gamma), i.e. the n-th output of a SplitMix64
/// generator whose state starts at `key`. Any draw can be computed without
/// producing the ones before it, so trials are independent of scheduling.
class CounterStream {
 public:
  constexpr explicit CounterStream(RngSeed seed) noexcept
      : key_(splitmix64_mix(splitmix64_mix(seed.master_seed) ^
                            (seed.trial_index * kGoldenGamma +
                             0xD1B54A32D192ED03ULL))) {}

  constexpr std::uint64_t bits(std::uint64_t counter) const noexcept {
    return splitmix64_mix(key_ + (counter + 1) * kGoldenGamma);
  }

  /// Uniform on (0, 1], 53-bit resolution.
  double uniform_open0(std::uint64_t counter) const noexcept {
    return static_cast<double>((bits(counter) >> 11) + 1) * 0x1.0p-53;
  }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform_open1(std::uint64_t counter) const noexcept {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  /// Standard complex Gaussian (E|w|^2 = 1) number `index` of the stream.
  ///
  /// Box-Muller in polar form: |w|^2 = -ln(u1) is Exp(1), arg w = 2 pi u2.
  /// Real and imaginary parts are then independent normal(0, 1/2) and
  /// P(|w| >= t) = exp(-t^2) exactly.
  std::complex<double> complex_gaussian(std::uint64_t index) const noexcept {
    const double u1 = uniform_open0(2 * index);
    const double u2 = uniform_open1(2 * index + 1);
    const double modulus = std::sqrt(-std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {modulus * std::cos(angle), modulus * std::sin(angle)};
  }

 private:
  std::uint64_t key_;
};

}  // namespace su2lab
