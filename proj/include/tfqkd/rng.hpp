#pragma once

#include <cstdint>
#include <limits>

namespace tfqkd {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: the i-th output of a stream is a pure function
/// of (key, i), so any pulse's draws can be reproduced without replaying the
/// ones before it. Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  constexpr explicit CounterRng(std::uint64_t key) : key_(key) {}

  /// Stream for one pulse of a seeded run.
  static constexpr CounterRng for_pulse(std::uint64_t seed, std::uint64_t pulse_index) {
    return CounterRng(mix64(mix64(seed ^ 0x6a09e667f3bcc909ULL) + pulse_index * 0x9e3779b97f4a7c15ULL));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() {
    ++counter_;
    return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform on [0, 1) with 53 random bits.
  constexpr double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  constexpr bool bernoulli(double p) { return uniform() < p; }

  constexpr bool coin() { return ((*this)() >> 63) != 0; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace tfqkd
