#pragma once

// Pulse-by-pulse Monte Carlo of the twin-field family. Every pulse draws from
// its own counter-based stream keyed by (seed, global pulse index), so results
// do not depend on how the run is split into batches or threads.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <thread>
#include <vector>

#include "tfqkd/core.hpp"
#include "tfqkd/phase_channel.hpp"
#include "tfqkd/protocol.hpp"
#include "tfqkd/rng.hpp"
#include "tfqkd/tally.hpp"

namespace tfqkd {

struct SimulationOptions {
  std::uint64_t first_pulse = 0;   // global index of the first pulse of this run
  unsigned threads = 1;
  std::uint64_t batch_size = 1u << 16;
  double channel_phase = 0.0;      // fixed tau_A - tau_B
  std::optional<PhasePath> drift;  // time-dependent tau_A - tau_B, added to channel_phase
  double clock_rate_hz = 1e9;      // maps pulse index to drift time
};

/// Threshold-detector measurement at the middle node. Intensities are the
/// per-party mean photon numbers before the channel; a single click is
/// swapped to the other detector with probability e_d.
template <class Rng>
Outcome charlie_measure(double intensity_a, double intensity_b, double delta_phi, const ChannelParams& channel,
                        Rng& rng) {
  const double a = intensity_a * channel.alice_arm();
  const double b = intensity_b * channel.bob_arm();
  const double cross = 2.0 * std::sqrt(a * b) * std::cos(delta_phi);
  const double n0 = std::max(0.0, 0.5 * (a + b + cross));
  const double n1 = std::max(0.0, 0.5 * (a + b - cross));
  const double keep = 1.0 - channel.dark_count_prob;
  const bool c0 = rng.bernoulli(1.0 - keep * std::exp(-n0));
  const bool c1 = rng.bernoulli(1.0 - keep * std::exp(-n1));
  if (c0 && c1) return Outcome::double_click;
  if (!c0 && !c1) return Outcome::no_click;
  const bool swap = channel.misalignment > 0.0 && rng.bernoulli(channel.misalignment);
  return (c0 != swap) ? Outcome::d0_only : Outcome::d1_only;
}

namespace detail {

template <class Rng>
std::uint8_t pick_intensity(const std::vector<double>& cumulative, Rng& rng) {
  if (cumulative.size() == 1) return 0;
  const double u = rng.uniform();
  for (std::size_t i = 0; i + 1 < cumulative.size(); ++i) {
    if (u < cumulative[i]) return static_cast<std::uint8_t>(i);
  }
  return static_cast<std::uint8_t>(cumulative.size() - 1);
}

inline std::vector<double> cumulative(const std::vector<double>& probs) {
  std::vector<double> c(probs.size());
  std::partial_sum(probs.begin(), probs.end(), c.begin());
  return c;
}

inline SliceRelation relate_slices(std::uint32_t a, std::uint32_t b, std::uint32_t m) {
  if (a == b) return SliceRelation::same;
  if (a == (b + m / 2) % m) return SliceRelation::opposite;
  return SliceRelation::other;
}

inline double channel_phase_at(const SimulationOptions& opt, std::uint64_t pulse) {
  double phase = opt.channel_phase;
  if (opt.drift) phase += opt.drift->at(static_cast<double>(pulse) / opt.clock_rate_hz * 1e3);
  return phase;
}

/// Runs `pulse(global_index, table)` over [first, first+n) in fixed-size
/// batches, spread across threads, and merges the per-batch tables.
template <class PulseFn>
TallyTable run_batched(const TallyTable& prototype, std::uint64_t n_pulses, const SimulationOptions& opt,
                       PulseFn pulse) {
  const std::uint64_t batch = std::max<std::uint64_t>(1, opt.batch_size);
  const std::uint64_t batches = (n_pulses + batch - 1) / batch;
  const unsigned threads = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(std::max<std::uint64_t>(1, batches))));
  std::vector<TallyTable> partial(threads, prototype);
  auto worker = [&](unsigned w) {
    for (std::uint64_t bi = w; bi < batches; bi += threads) {
      const std::uint64_t begin = bi * batch;
      const std::uint64_t end = std::min(n_pulses, begin + batch);
      for (std::uint64_t i = begin; i < end; ++i) pulse(opt.first_pulse + i, partial[w]);
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker, w);
  }
  TallyTable out = prototype;
  for (const auto& t : partial) out.merge(t);
  return out;
}

}  // namespace detail

/// Twin-field (phase slices, bit and basis phases, decoys) when
/// `with_basis` is true; phase-matching (no basis phase, same or opposite
/// slices kept) otherwise. Mode bits in the tally are the basis choices.
inline TallyTable run_tfqkd(const ChannelParams& channel, const ProtocolConfig& config, std::uint64_t n_pulses,
                            std::uint64_t seed, const SimulationOptions& opt = {}) {
  channel.validate();
  config.validate();
  const bool with_basis = config.variant != ProtocolVariant::pm;
  const auto levels = config.intensities();
  const auto cum = detail::cumulative(config.selection_probs());
  const auto m = static_cast<std::uint32_t>(config.slice_count);
  const ProtocolVariant tag = !with_basis ? ProtocolVariant::pm
                             : config.variant == ProtocolVariant::tf_star ? ProtocolVariant::tf_star
                                                                          : ProtocolVariant::tf_gllp;
  TallyTable proto(tag, levels, config.slice_count);

  return detail::run_batched(proto, n_pulses, opt, [&](std::uint64_t pulse, TallyTable& table) {
    auto rng = CounterRng::for_pulse(seed, pulse);
    TallyKey key;
    key.intensity_a = detail::pick_intensity(cum, rng);
    key.intensity_b = detail::pick_intensity(cum, rng);
    const bool bit_a = rng.coin();
    const bool bit_b = rng.coin();
    key.mode_a = with_basis && rng.coin() ? 1 : 0;
    key.mode_b = with_basis && rng.coin() ? 1 : 0;
    const Phase rho_a(rng.uniform() * kTwoPi);
    const Phase rho_b(rng.uniform() * kTwoPi);
    const double phi_a = (bit_a ? std::numbers::pi : 0.0) + key.mode_a * 0.5 * std::numbers::pi + rho_a.radians();
    const double phi_b = (bit_b ? std::numbers::pi : 0.0) + key.mode_b * 0.5 * std::numbers::pi + rho_b.radians();
    const double dphi = phi_a - phi_b + detail::channel_phase_at(opt, pulse);
    key.outcome = charlie_measure(0.5 * levels[key.intensity_a], 0.5 * levels[key.intensity_b], dphi, channel, rng);
    key.relation = detail::relate_slices(slice_of_phase(rho_a, m).index, slice_of_phase(rho_b, m).index, m);
    key.bits_equal = bit_a == bit_b;
    table.add(key);
  });
}

/// PM-MDI / no-phase-post-selection: key mode sends |alpha> or |-alpha> at the
/// signal intensity with no phase randomization; test mode sends a
/// phase-randomized pulse at an intensity drawn from the decoy set.
inline TallyTable run_pmmdi_npp(const ChannelParams& channel, const ProtocolConfig& config, std::uint64_t n_pulses,
                                std::uint64_t seed, const SimulationOptions& opt = {}) {
  channel.validate();
  config.validate();
  const auto levels = config.intensities();
  const auto cum = detail::cumulative(config.selection_probs());
  const auto m = static_cast<std::uint32_t>(config.slice_count);
  TallyTable proto(config.variant == ProtocolVariant::pm_mdi ? ProtocolVariant::pm_mdi : ProtocolVariant::npp, levels,
                   config.slice_count);

  return detail::run_batched(proto, n_pulses, opt, [&](std::uint64_t pulse, TallyTable& table) {
    auto rng = CounterRng::for_pulse(seed, pulse);
    struct Party {
      std::uint8_t mode, intensity;
      bool bit;
      Phase phase;
    };
    auto prepare = [&]() {
      Party p{};
      p.mode = rng.bernoulli(config.key_mode_prob) ? 0 : 1;
      if (p.mode == 0) {
        p.intensity = 0;
        p.bit = rng.coin();
        p.phase = Phase(p.bit ? std::numbers::pi : 0.0);
      } else {
        p.intensity = detail::pick_intensity(cum, rng);
        p.bit = false;
        p.phase = Phase(rng.uniform() * kTwoPi);
      }
      return p;
    };
    const Party a = prepare();
    const Party b = prepare();
    const double dphi = a.phase.radians() - b.phase.radians() + detail::channel_phase_at(opt, pulse);
    TallyKey key;
    key.intensity_a = a.intensity;
    key.intensity_b = b.intensity;
    key.mode_a = a.mode;
    key.mode_b = b.mode;
    key.outcome = charlie_measure(0.5 * levels[a.intensity], 0.5 * levels[b.intensity], dphi, channel, rng);
    if (a.mode == 0 && b.mode == 0) {
      key.relation = SliceRelation::same;
      key.bits_equal = a.bit == b.bit;
    } else if (a.mode == 1 && b.mode == 1) {
      key.relation = detail::relate_slices(slice_of_phase(a.phase, m).index, slice_of_phase(b.phase, m).index, m);
      key.bits_equal = true;
    } else {
      key.relation = SliceRelation::other;
      key.bits_equal = false;
    }
    table.add(key);
  });
}

inline bool sns_test_passes(SnsTestCondition condition, double lambda, double rho_a, double rho_b) {
  const double lhs = condition == SnsTestCondition::as_printed ? 1.0 - std::abs(std::cos(rho_a) - std::cos(rho_b))
                                                               : 1.0 - std::abs(std::cos(rho_a - rho_b));
  return lhs <= std::abs(lambda);
}

/// Sending-or-not-sending. Intensity index 0 is the Z-mode sending pulse,
/// index 1 the X-mode test pulse, kNoPulse a Z-mode "not sending" slot.
inline TallyTable run_sns(const ChannelParams& channel, const ProtocolConfig& config, std::uint64_t n_pulses,
                          std::uint64_t seed, const SimulationOptions& opt = {}) {
  channel.validate();
  config.validate();
  const double eps = config.send_prob;
  const std::vector<double> levels{config.signal_intensity, config.sns_test_intensity};
  TallyTable proto(ProtocolVariant::sns, levels, config.slice_count);

  return detail::run_batched(proto, n_pulses, opt, [&](std::uint64_t pulse, TallyTable& table) {
    auto rng = CounterRng::for_pulse(seed, pulse);
    struct Party {
      std::uint8_t mode, intensity;
      bool sends;
      double rho;
    };
    auto prepare = [&]() {
      Party p{};
      p.mode = rng.bernoulli(config.sns_z_prob) ? 0 : 1;
      p.rho = rng.uniform() * kTwoPi;
      if (p.mode == 0) {
        p.sends = rng.bernoulli(eps);
        p.intensity = p.sends ? 0 : kNoPulse;
      } else {
        p.sends = true;
        p.intensity = 1;
      }
      return p;
    };
    const Party a = prepare();
    const Party b = prepare();
    auto level = [&](const Party& p) { return p.sends ? 0.5 * levels[p.intensity] : 0.0; };
    const double dphi = a.rho - b.rho + detail::channel_phase_at(opt, pulse);
    TallyKey key;
    key.intensity_a = a.intensity;
    key.intensity_b = b.intensity;
    key.mode_a = a.mode;
    key.mode_b = b.mode;
    key.outcome = charlie_measure(level(a), level(b), dphi, channel, rng);
    if (a.mode == 0 && b.mode == 0) {
      // Alice: send = 0, not send = 1.  Bob: send = 1, not send = 0.
      key.relation = SliceRelation::same;
      key.bits_equal = (a.sends ? 0 : 1) == (b.sends ? 1 : 0);
    } else if (a.mode == 1 && b.mode == 1) {
      key.relation = sns_test_passes(config.sns_condition, config.sns_test_param, a.rho, b.rho)
                         ? SliceRelation::same
                         : SliceRelation::other;
      key.bits_equal = std::cos(a.rho - b.rho) >= 0.0;
    } else {
      key.relation = SliceRelation::other;
      key.bits_equal = false;
    }
    table.add(key);
  });
}

/// Dispatches on the protocol variant.
inline TallyTable run_protocol(const ChannelParams& channel, const ProtocolConfig& config, std::uint64_t n_pulses,
                               std::uint64_t seed, const SimulationOptions& opt = {}) {
  switch (config.variant) {
    case ProtocolVariant::tf_gllp:
    case ProtocolVariant::tf_star:
    case ProtocolVariant::pm: return run_tfqkd(channel, config, n_pulses, seed, opt);
    case ProtocolVariant::npp:
    case ProtocolVariant::pm_mdi: return run_pmmdi_npp(channel, config, n_pulses, seed, opt);
    case ProtocolVariant::sns: return run_sns(channel, config, n_pulses, seed, opt);
  }
  throw DomainError("unknown protocol variant");
}

}  // namespace tfqkd
