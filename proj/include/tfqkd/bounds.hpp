#pragma once

// Repeaterless and single-repeater secret-key capacity bounds of a pure-loss
// channel with transmittance eta.

#include <cmath>
#include <limits>
#include <string>
#include <string_view>

#include "tfqkd/core.hpp"

namespace tfqkd {

namespace detail {

inline void require_open_unit(double eta, const char* name) {
  if (!(eta > 0.0 && eta < 1.0)) {
    throw DomainError(std::string(name) + ": eta must lie in (0,1), got " + std::to_string(eta));
  }
}

}  // namespace detail

/// -log2(1-eta), the PLOB repeaterless capacity.
inline double plob_bound(double eta) {
  detail::require_open_unit(eta, "plob_bound");
  return -std::log1p(-eta) / std::numbers::ln2;
}

/// Reverse-coherent-information lower bound; numerically identical to PLOB.
inline double rci_lower_bound(double eta) {
  detail::require_open_unit(eta, "rci_lower_bound");
  return plob_bound(eta);
}

/// Squashed-entanglement upper bound log2((1+eta)/(1-eta)).
inline double tgw_bound(double eta) {
  detail::require_open_unit(eta, "tgw_bound");
  return (std::log1p(eta) - std::log1p(-eta)) / std::numbers::ln2;
}

/// Single-repeater bound -log2(1-sqrt(eta)).
inline double srb_bound(double eta) {
  detail::require_open_unit(eta, "srb_bound");
  return -std::log1p(-std::sqrt(eta)) / std::numbers::ln2;
}

enum class BoundKind { plob, srb, tgw };

inline std::string_view bound_name(BoundKind kind) {
  switch (kind) {
    case BoundKind::plob: return "plob";
    case BoundKind::srb: return "srb";
    case BoundKind::tgw: return "tgw";
  }
  return "?";
}

/// Curve-friendly evaluation: eta = 1 gives +inf and eta = 0 gives 0 instead
/// of throwing. Values outside [0,1] still throw.
inline double bound_or_sentinel(BoundKind kind, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw DomainError("eta must lie in [0,1], got " + std::to_string(eta));
  }
  if (eta == 1.0) return std::numeric_limits<double>::infinity();
  if (eta == 0.0) return 0.0;
  switch (kind) {
    case BoundKind::plob: return plob_bound(eta);
    case BoundKind::srb: return srb_bound(eta);
    case BoundKind::tgw: return tgw_bound(eta);
  }
  return 0.0;
}

enum class BoundReference {
  fiber_only,       // absolute bound, no device imperfections
  device_included,  // fiber loss times detector efficiency
};

/// PLOB evaluated at the channel's loss. The fiber-only variant is the
/// "absolute" bound; the device variant folds in the detector efficiency.
inline double absolute_plob(const ChannelParams& channel,
                            BoundReference ref = BoundReference::fiber_only) {
  channel.validate();
  double eta = channel.eta();
  if (ref == BoundReference::device_included) eta *= channel.detector_efficiency;
  return bound_or_sentinel(BoundKind::plob, eta);
}

}  // namespace tfqkd
