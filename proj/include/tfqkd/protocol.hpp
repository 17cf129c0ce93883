#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tfqkd/core.hpp"

namespace tfqkd {

enum class ProtocolVariant { tf_gllp, tf_star, pm, pm_mdi, npp, sns };

inline std::string_view variant_name(ProtocolVariant v) {
  switch (v) {
    case ProtocolVariant::tf_gllp: return "tf_gllp";
    case ProtocolVariant::tf_star: return "tf_star";
    case ProtocolVariant::pm: return "pm";
    case ProtocolVariant::pm_mdi: return "pm_mdi";
    case ProtocolVariant::npp: return "npp";
    case ProtocolVariant::sns: return "sns";
  }
  return "?";
}

inline std::optional<ProtocolVariant> parse_variant(std::string_view name) {
  for (auto v : {ProtocolVariant::tf_gllp, ProtocolVariant::tf_star, ProtocolVariant::pm,
                 ProtocolVariant::pm_mdi, ProtocolVariant::npp, ProtocolVariant::sns}) {
    if (variant_name(v) == name) return v;
  }
  return std::nullopt;
}

/// Which acceptance rule decides whether an SNS X-mode pair is kept.
enum class SnsTestCondition {
  as_printed,  // 1 - |cos(rho_A) - cos(rho_B)| <= |lambda|
  closeness,   // 1 - |cos(rho_A - rho_B)| <= |lambda|
};

/// Intensities are the total of the pulse pair; each party sends half.
struct ProtocolConfig {
  ProtocolVariant variant = ProtocolVariant::pm;
  int slice_count = 16;
  double signal_intensity = 0.1;
  std::vector<double> decoy_intensities{};
  std::vector<double> intensity_probs{};  // empty: uniform over signal + decoys
  double ec_efficiency = 1.15;
  double sifting_factor = 1.0;
  double key_mode_prob = 0.5;  // PM-MDI/NPP probability of m = 0

  // sending-or-not-sending
  double send_prob = 0.1;
  double sns_test_param = 0.1;
  double sns_test_intensity = 0.1;
  double sns_z_prob = 0.5;
  SnsTestCondition sns_condition = SnsTestCondition::as_printed;

  /// Signal first, then the decoys in the order given.
  std::vector<double> intensities() const {
    std::vector<double> all{signal_intensity};
    all.insert(all.end(), decoy_intensities.begin(), decoy_intensities.end());
    return all;
  }

  std::vector<double> selection_probs() const {
    const std::size_t n = 1 + decoy_intensities.size();
    if (intensity_probs.empty()) return std::vector<double>(n, 1.0 / static_cast<double>(n));
    return intensity_probs;
  }

  void validate() const {
    validate_slice_count(slice_count);
    if (!(signal_intensity >= 0.0)) throw DomainError("signal_intensity must be >= 0");
    if (decoy_intensities.size() > 3) throw DomainError("at most three decoy intensities");
    double previous = signal_intensity;
    for (double d : decoy_intensities) {
      if (!(d >= 0.0)) throw DomainError("decoy intensities must be >= 0");
      if (!(d < previous)) throw DomainError("intensities must be strictly decreasing: mu > nu > omega");
      previous = d;
    }
    if (!intensity_probs.empty()) {
      if (intensity_probs.size() != 1 + decoy_intensities.size())
        throw DomainError("intensity_probs needs one entry per intensity");
      double sum = 0.0;
      for (double p : intensity_probs) {
        if (!(p >= 0.0)) throw DomainError("intensity_probs must be >= 0");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9) throw DomainError("intensity_probs must sum to 1");
    }
    if (!(ec_efficiency >= 1.0)) throw DomainError("ec_efficiency must be >= 1");
    if (!(sifting_factor > 0.0 && sifting_factor <= 1.0)) throw DomainError("sifting_factor must be in (0,1]");
    if (!(key_mode_prob >= 0.0 && key_mode_prob <= 1.0)) throw DomainError("key_mode_prob must be in [0,1]");
    if (!(send_prob >= 0.0 && send_prob <= 1.0)) throw DomainError("send_prob must be in [0,1]");
    if (!std::isfinite(sns_test_param)) throw DomainError("sns_test_param must be finite");
    if (!(sns_test_intensity >= 0.0)) throw DomainError("sns_test_intensity must be >= 0");
    if (!(sns_z_prob >= 0.0 && sns_z_prob <= 1.0)) throw DomainError("sns_z_prob must be in [0,1]");
  }
};

/// Per-pulse detection statistics feeding the rate formulas.
struct DetectionStats {
  double gain = 0.0;                // Q_mu
  double qber_z = 0.0;              // E_mu^Z
  double phase_error_x = 0.0;       // E_mu^X
  double single_photon_gain = 0.0;  // Q_1,mu
  double single_photon_qber = 0.0;  // e_1
  double single_photon_yield = 0.0; // Y_1
};

}  // namespace tfqkd
