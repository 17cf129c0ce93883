#pragma once

// Elementary quantities shared by the rate models, the simulator and the
// phase-channel model.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace tfqkd {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Thrown for arguments outside an operation's mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Binary Shannon entropy in bits, with 0*log2(0) taken as 0.
inline double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DomainError("binary_entropy: argument outside [0,1]: " + std::to_string(x));
  }
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

/// Fiber transmittance 10^(-alpha*L/10).
inline double channel_transmittance(double length_km, double loss_db_per_km) {
  if (!(length_km >= 0.0) || !(loss_db_per_km >= 0.0)) {
    throw DomainError("channel_transmittance: length and loss must be >= 0");
  }
  return std::pow(10.0, -loss_db_per_km * length_km / 10.0);
}

/// Transmittance of an attenuation given directly in dB.
inline double attenuation_transmittance(double loss_db) { return std::pow(10.0, -loss_db / 10.0); }

/// Reduces any finite phase to the canonical range [0, 2pi).
inline double reduce_phase(double phase) {
  double r = std::fmod(phase, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod of a value just below a multiple of 2pi can round up to exactly 2pi
  if (r >= kTwoPi) r = 0.0;
  return r;
}

/// A phase value stored in [0, 2pi).
class Phase {
 public:
  constexpr Phase() = default;
  explicit Phase(double radians) : value_(reduce_phase(radians)) {}

  double radians() const { return value_; }

  friend Phase operator+(Phase a, Phase b) { return Phase(a.value_ + b.value_); }
  friend Phase operator-(Phase a, Phase b) { return Phase(a.value_ - b.value_); }

 private:
  double value_ = 0.0;
};

/// One of M equal sectors of [0, 2pi); slice k covers [2pi k/M, 2pi (k+1)/M).
struct PhaseSliceIndex {
  std::uint32_t index = 0;
  std::uint32_t slice_count = 2;

  friend bool operator==(const PhaseSliceIndex&, const PhaseSliceIndex&) = default;
};

inline void validate_slice_count(std::int64_t slice_count) {
  if (slice_count < 2 || slice_count % 2 != 0) {
    throw DomainError("slice count must be even and >= 2, got " + std::to_string(slice_count));
  }
}

inline PhaseSliceIndex slice_of_phase(Phase phase, std::int64_t slice_count) {
  validate_slice_count(slice_count);
  const auto m = static_cast<std::uint32_t>(slice_count);
  auto k = static_cast<std::uint32_t>(std::floor(phase.radians() * m / kTwoPi));
  if (k >= m) k = m - 1;  // rounding guard for phases within an ulp of 2pi
  return {k, m};
}

inline PhaseSliceIndex slice_of_phase(double phase, std::int64_t slice_count) {
  return slice_of_phase(Phase(phase), slice_count);
}

/// Fiber and detector parameters of a symmetric (or mildly asymmetric) link
/// with the measurement node in the middle.
struct ChannelParams {
  double length_km = 0.0;
  double loss_db_per_km = 0.2;
  double detector_efficiency = 1.0;
  double dark_count_prob = 0.0;  // per detector per gate
  double misalignment = 0.0;     // e_d
  double asymmetry_db = 0.0;     // extra loss on Bob's arm

  void validate() const {
    if (!(length_km >= 0.0)) throw DomainError("length_km must be >= 0");
    if (!(loss_db_per_km >= 0.0)) throw DomainError("loss_db_per_km must be >= 0");
    if (!(detector_efficiency >= 0.0 && detector_efficiency <= 1.0))
      throw DomainError("detector_efficiency must be in [0,1]");
    if (!(dark_count_prob >= 0.0 && dark_count_prob < 1.0))
      throw DomainError("dark_count_prob must be in [0,1)");
    if (!(misalignment >= 0.0 && misalignment <= 0.5))
      throw DomainError("misalignment must be in [0,0.5]");
    if (!std::isfinite(asymmetry_db)) throw DomainError("asymmetry_db must be finite");
  }

  /// Total fiber transmittance between Alice and Bob.
  double eta() const { return channel_transmittance(length_km, loss_db_per_km); }

  /// Per-arm transmittance including the detector, t = sqrt(eta)*eta_d.
  double alice_arm() const { return std::sqrt(eta()) * detector_efficiency; }
  double bob_arm() const { return alice_arm() * attenuation_transmittance(asymmetry_db); }

  /// Fiber-only transmittance of each arm.
  double fiber_arm() const { return std::sqrt(eta()); }
};

}  // namespace tfqkd
