#pragma once

// Point estimates with binomial standard errors from raw tally counts, and
// the Monte-Carlo-fed key rates built on them.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "tfqkd/protocol.hpp"
#include "tfqkd/rates.hpp"
#include "tfqkd/tally.hpp"

namespace tfqkd {

/// Thrown when a group needed for an estimate has no counts.
class EmptyGroupError : public DomainError {
 public:
  explicit EmptyGroupError(const std::string& group) : DomainError("empty tally group: " + group), group_(group) {}
  const std::string& group() const { return group_; }

 private:
  std::string group_;
};

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
};

/// k/n with the binomial standard error. At k = 0 or k = n the error is the
/// one-sided 1-sigma Clopper-Pearson distance, 1 - 0.3173^(1/n).
inline Estimate binomial_estimate(std::uint64_t k, std::uint64_t n) {
  if (n == 0) throw DomainError("binomial_estimate: zero trials");
  const double p = static_cast<double>(k) / static_cast<double>(n);
  double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  if (k == 0 || k == n) se = 1.0 - std::pow(1.0 - 0.682689492137, 1.0 / static_cast<double>(n));
  return {p, se, k, n};
}

struct EstimatedStats {
  ProtocolVariant variant = ProtocolVariant::pm;
  std::uint64_t pulses = 0;
  Estimate gain;                        // key group
  Estimate qber_z;                      // key group
  std::optional<Estimate> test_gain;    // conjugate/test group
  std::optional<Estimate> phase_error;  // conjugate/test group QBER

  std::uint64_t sifted() const { return gain.successes; }
  double sifted_fraction() const { return pulses ? static_cast<double>(sifted()) / static_cast<double>(pulses) : 0.0; }

  DetectionStats point() const {
    DetectionStats s;
    s.gain = gain.value;
    s.qber_z = qber_z.value;
    s.phase_error_x = phase_error ? phase_error->value : 0.5;
    return s;
  }
};

namespace detail {

inline bool is_error(const TallyKey& k, bool sending_basis) {
  if (!is_effective(k.outcome)) return false;
  if (sending_basis) return !k.bits_equal;
  const bool d0 = k.outcome == Outcome::d0_only;
  if (k.relation == SliceRelation::opposite) return d0 == k.bits_equal;
  return d0 != k.bits_equal;
}

struct Group {
  std::uint64_t total = 0;
  std::uint64_t effective = 0;
  std::uint64_t errors = 0;
};

template <class Pred>
Group collect(const TallyTable& t, Pred in_group, bool sending_basis = false) {
  Group g;
  t.for_each_nonzero([&](const TallyKey& k, std::uint64_t n) {
    if (!in_group(k)) return;
    g.total += n;
    if (is_effective(k.outcome)) g.effective += n;
    if (is_error(k, sending_basis)) g.errors += n;
  });
  return g;
}

inline bool matched(SliceRelation r) { return r == SliceRelation::same || r == SliceRelation::opposite; }

}  // namespace detail

/// Key-group gain and QBER plus the conjugate-group phase-error observable:
///   tf:      key (mu,mu) X/X same slice;   phase error from (mu,mu) Y/Y same slice
///   pm:      key (mu,mu) same|opposite;    phase error from (nu,nu) same|opposite
///   npp:     key m=0 both;                 phase error from (mu,mu) test pairs matched
///   sns:     key Z both;                   phase error from X pairs passing the test
inline EstimatedStats tallies_to_stats(const TallyTable& table) {
  using detail::collect;
  using detail::matched;
  EstimatedStats out;
  out.variant = table.variant();
  out.pulses = table.total();

  detail::Group key;
  std::optional<detail::Group> test;
  std::string key_name;
  switch (table.variant()) {
    case ProtocolVariant::tf_gllp:
    case ProtocolVariant::tf_star:
      key_name = "signal/signal, X/X basis, same slice";
      key = collect(table, [](const TallyKey& k) {
        return k.intensity_a == 0 && k.intensity_b == 0 && k.mode_a == 0 && k.mode_b == 0 &&
               k.relation == SliceRelation::same;
      });
      test = collect(table, [](const TallyKey& k) {
        return k.intensity_a == 0 && k.intensity_b == 0 && k.mode_a == 1 && k.mode_b == 1 &&
               k.relation == SliceRelation::same;
      });
      break;
    case ProtocolVariant::pm:
      key_name = "signal/signal, same or opposite slice";
      key = collect(table, [](const TallyKey& k) {
        return k.intensity_a == 0 && k.intensity_b == 0 && matched(k.relation);
      });
      if (table.intensities().size() > 1) {
        test = collect(table, [](const TallyKey& k) {
          return k.intensity_a == 1 && k.intensity_b == 1 && matched(k.relation);
        });
      }
      break;
    case ProtocolVariant::npp:
    case ProtocolVariant::pm_mdi:
      key_name = "key mode m_A = m_B = 0";
      key = collect(table, [](const TallyKey& k) { return k.mode_a == 0 && k.mode_b == 0; });
      test = collect(table, [](const TallyKey& k) {
        return k.mode_a == 1 && k.mode_b == 1 && k.intensity_a == 0 && k.intensity_b == 0 && matched(k.relation);
      });
      break;
    case ProtocolVariant::sns:
      key_name = "Z mode both parties";
      key = collect(table, [](const TallyKey& k) { return k.mode_a == 0 && k.mode_b == 0; }, true);
      test = collect(table, [](const TallyKey& k) {
        return k.mode_a == 1 && k.mode_b == 1 && k.relation == SliceRelation::same;
      });
      break;
  }

  if (key.total == 0) throw EmptyGroupError(key_name);
  out.gain = binomial_estimate(key.effective, key.total);
  if (key.effective == 0) throw EmptyGroupError("effective detections in " + key_name);
  out.qber_z = binomial_estimate(key.errors, key.effective);
  if (test && test->total > 0) {
    out.test_gain = binomial_estimate(test->effective, test->total);
    if (test->effective > 0) out.phase_error = binomial_estimate(test->errors, test->effective);
  }
  return out;
}

/// Key rate per pulse from simulated tallies: the phase-matching formula for
/// pm, the one-way skeleton for everything else.
inline double mc_rate(const EstimatedStats& stats, const ProtocolConfig& config) {
  if (!stats.phase_error) throw EmptyGroupError("phase-error estimation group");
  if (stats.variant == ProtocolVariant::pm) return pm_rate(stats.point(), config);
  return tfstar_rate(stats.sifted_fraction(), stats.phase_error->value, stats.qber_z.value, config.ec_efficiency);
}

}  // namespace tfqkd
