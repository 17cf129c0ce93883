#pragma once

// Asymptotic key-rate formulas for the twin-field family on top of a shared
// threshold-detector model.

#include <algorithm>
#include <cmath>
#include <functional>

#include <boost/math/quadrature/gauss.hpp>

#include "tfqkd/core.hpp"
#include "tfqkd/protocol.hpp"

namespace tfqkd {

/// Distribution of the residual phase difference between matched pulses.
enum class ResidualKind {
  slice_sifted,  // both random phases uniform within one slice: triangular on [-2pi/M, 2pi/M]
  fixed,         // deterministic residual equal to the offset
};

/// How E^X is modeled.
enum class PhaseErrorModel {
  slice_discretization,  // uniform mismatch on [-pi/M, pi/M] + e_d + dark counts
  photon_parity,         // even-photon-number fraction, odd part with the discretization error
};

struct ModelOptions {
  ResidualKind residual = ResidualKind::slice_sifted;
  double phase_offset = 0.0;  // extra fixed channel phase (rad)
  PhaseErrorModel phase_error = PhaseErrorModel::slice_discretization;
};

namespace detail {

/// Single-click probabilities of the two detectors for one phase value.
struct ClickSplit {
  double right = 0.0;  // only the detector indicating agreement clicks
  double wrong = 0.0;  // only the other detector clicks
};

struct InterferenceModel {
  double arm_a = 0.0;  // post-loss mean photon number from Alice
  double arm_b = 0.0;
  double dark = 0.0;

  ClickSplit at(double theta) const {
    const double cross = 2.0 * std::sqrt(arm_a * arm_b) * std::cos(theta);
    const double n0 = std::max(0.0, 0.5 * (arm_a + arm_b + cross));
    const double n1 = std::max(0.0, 0.5 * (arm_a + arm_b - cross));
    const double p0 = 1.0 - (1.0 - dark) * std::exp(-n0);
    const double p1 = 1.0 - (1.0 - dark) * std::exp(-n1);
    return {p0 * (1.0 - p1), p1 * (1.0 - p0)};
  }
};

template <class F>
double integrate(F f, double a, double b) {
  if (a == b) return 0.0;
  // integrands are smooth over at most a quarter turn; a fixed rule is plenty
  return boost::math::quadrature::gauss<double, 30>::integrate(f, a, b);
}

/// Expected click split for theta = offset + u, u drawn from a symmetric
/// triangular density of half-width w.
inline ClickSplit average_triangular(const InterferenceModel& m, double offset, double w) {
  auto weight = [w](double u) { return (w - std::abs(u)) / (w * w); };
  auto right = [&](double u) { return m.at(offset + u).right * weight(u); };
  auto wrong = [&](double u) { return m.at(offset + u).wrong * weight(u); };
  return {integrate(right, -w, 0.0) + integrate(right, 0.0, w),
          integrate(wrong, -w, 0.0) + integrate(wrong, 0.0, w)};
}

/// Expected click split for theta = offset + u, u uniform on [-h, h].
inline ClickSplit average_uniform(const InterferenceModel& m, double offset, double h) {
  auto right = [&](double u) { return m.at(offset + u).right; };
  auto wrong = [&](double u) { return m.at(offset + u).wrong; };
  return {integrate(right, -h, h) / (2.0 * h), integrate(wrong, -h, h) / (2.0 * h)};
}

inline double mix_misalignment(double e, double misalignment) {
  return e * (1.0 - misalignment) + (1.0 - e) * misalignment;
}

inline double qber_of(const ClickSplit& s, double misalignment) {
  const double total = s.right + s.wrong;
  if (total <= 0.0) return 0.0;
  return (s.wrong * (1.0 - misalignment) + s.right * misalignment) / total;
}

inline double clamp_error(double e) { return std::clamp(e, 0.0, 0.5); }

}  // namespace detail

/// Gains and error rates of slice-matched signal pairs under the shared
/// threshold-detector model. Each party sends mu/2; an arm transmits
/// t = sqrt(eta)*eta_d, and the two single-click probabilities follow from
/// n0 = t mu (1+cos dphi)/2, n1 = t mu (1-cos dphi)/2.
inline DetectionStats model_detection_stats(const ChannelParams& channel, const ProtocolConfig& config,
                                            const ModelOptions& options = {}) {
  channel.validate();
  config.validate();
  const double mu = config.signal_intensity;
  const double t_a = channel.alice_arm();
  const double t_b = channel.bob_arm();
  const double pd = channel.dark_count_prob;
  const double ed = channel.misalignment;
  const double m = static_cast<double>(config.slice_count);

  const detail::InterferenceModel model{0.5 * mu * t_a, 0.5 * mu * t_b, pd};

  detail::ClickSplit key;
  double intrinsic_single = 0.0;  // single-photon interference error of the key residual
  if (options.residual == ResidualKind::fixed) {
    key = model.at(options.phase_offset);
    intrinsic_single = 0.5 * (1.0 - std::cos(options.phase_offset));
  } else {
    const double half = std::numbers::pi / m;
    key = detail::average_triangular(model, options.phase_offset, 2.0 * half);
    const double sinc = std::sin(half) / half;
    intrinsic_single = 0.5 * (1.0 - std::cos(options.phase_offset) * sinc * sinc);
  }

  DetectionStats s;
  s.gain = key.right + key.wrong;
  s.qber_z = s.gain > 0.0 ? detail::qber_of(key, ed) : 0.0;

  // E^X
  const double half = std::numbers::pi / m;
  const double discretization =
      options.residual == ResidualKind::fixed
          ? 0.5 * (1.0 - std::cos(options.phase_offset))
          : 0.5 * (1.0 - std::cos(options.phase_offset) * std::sin(half) / half);
  if (options.phase_error == PhaseErrorModel::slice_discretization) {
    const detail::ClickSplit x = options.residual == ResidualKind::fixed
                                     ? key
                                     : detail::average_uniform(model, options.phase_offset, half);
    s.phase_error_x = detail::qber_of(x, ed);
  } else {
    // Even photon numbers of the pair carry the phase error; the generating
    // functions of Poisson(mu) weighted by the survival (1-t)^k give the
    // at-least-one-click yield split by parity.
    const double t = 0.5 * (t_a + t_b);
    const double no_dark = (1.0 - pd) * (1.0 - pd);
    const double total = 1.0 - no_dark * std::exp(-mu * t);
    const double even = std::exp(-mu) * (std::cosh(mu) - no_dark * std::cosh(mu * (1.0 - t)));
    const double q_even = total > 0.0 ? std::clamp(even / total, 0.0, 1.0) : 1.0;
    s.phase_error_x = q_even + (1.0 - q_even) * detail::mix_misalignment(discretization, ed);
  }

  // single-photon component: one photon from either party survives, or a dark count
  const double y0 = 1.0 - (1.0 - pd) * (1.0 - pd);
  const double t_single = 0.5 * (t_a + t_b);
  s.single_photon_yield = 1.0 - (1.0 - t_single) * (1.0 - pd) * (1.0 - pd);
  const double signal_part = s.single_photon_yield - y0;
  s.single_photon_qber =
      s.single_photon_yield > 0.0
          ? (signal_part * detail::mix_misalignment(intrinsic_single, ed) + 0.5 * y0) / s.single_photon_yield
          : 0.0;
  s.single_photon_gain = std::min(mu * std::exp(-mu) * s.single_photon_yield, s.gain);
  return s;
}

/// GLLP-style twin-field rate q{Q1[1-H(e1)] - f Q H(E)}, clamped at zero.
inline double tf_gllp_rate(const DetectionStats& stats, const ProtocolConfig& config) {
  const double r = config.sifting_factor *
                   (stats.single_photon_gain * (1.0 - binary_entropy(detail::clamp_error(stats.single_photon_qber))) -
                    config.ec_efficiency * stats.gain * binary_entropy(detail::clamp_error(stats.qber_z)));
  return std::max(0.0, r);
}

/// One-way skeleton N[1-H(e_ph)] - f N H(E) with N the sifted fraction per pulse.
inline double tfstar_rate(double sifted_fraction, double phase_error, double qber, double ec_efficiency) {
  if (!(sifted_fraction >= 0.0 && sifted_fraction <= 1.0))
    throw DomainError("tfstar_rate: sifted fraction must be in [0,1]");
  if (!(phase_error >= 0.0 && phase_error <= 1.0) || !(qber >= 0.0 && qber <= 1.0))
    throw DomainError("tfstar_rate: error rates must be in [0,1]");
  const double leak = ec_efficiency * sifted_fraction * binary_entropy(detail::clamp_error(qber));
  return std::max(0.0, sifted_fraction * (1.0 - binary_entropy(detail::clamp_error(phase_error))) - leak);
}

/// Phase-matching rate (2/M) Q [1 - H(E^Z) - H(E^X)], clamped at zero.
inline double pm_rate(const DetectionStats& stats, const ProtocolConfig& config) {
  validate_slice_count(config.slice_count);
  const double r = 2.0 / config.slice_count * stats.gain *
                   (1.0 - binary_entropy(detail::clamp_error(stats.qber_z)) -
                    binary_entropy(detail::clamp_error(stats.phase_error_x)));
  return std::max(0.0, r);
}

/// Loss-only PM-MDI rate of coherent key states with total intensity mu.
inline double pmmdi_rate(double mu, double eta) {
  if (!(mu > 0.0)) throw DomainError("pmmdi_rate: mu must be > 0");
  if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("pmmdi_rate: eta must be in (0,1]");
  const double s = std::sqrt(eta);
  const double survive = std::exp(-2.0 * mu * s);
  const double phase = 0.5 * (1.0 - std::exp(-4.0 * mu * (1.0 - s) * survive));
  return std::max(0.0, -std::expm1(-2.0 * mu * s) * (1.0 - binary_entropy(detail::clamp_error(phase))));
}

struct IntensityOptimum {
  double mu = 0.0;
  double rate = 0.0;
  bool degenerate = false;  // rate is zero over the whole search grid
};

/// Maximizes rate(mu) over [1e-4, 10]: a 64-point log grid, then a golden-section
/// refinement in log(mu) around the best grid point to relative tolerance 1e-4.
inline IntensityOptimum optimize_intensity(const std::function<double(double)>& rate) {
  constexpr int kGrid = 64;
  constexpr double kLogLo = -4.0;
  constexpr double kLogHi = 1.0;
  const double step = (kLogHi - kLogLo) / (kGrid - 1);
  auto mu_at = [&](int i) { return std::pow(10.0, kLogLo + step * i); };

  int best = 0;
  double best_rate = -1.0;
  for (int i = 0; i < kGrid; ++i) {
    const double r = rate(mu_at(i));
    if (r > best_rate) {
      best_rate = r;
      best = i;
    }
  }
  if (!(best_rate > 0.0)) {
    return {std::pow(10.0, 0.5 * (kLogLo + kLogHi)), 0.0, true};
  }

  double a = std::log(mu_at(std::max(best - 1, 0)));
  double b = std::log(mu_at(std::min(best + 1, kGrid - 1)));
  auto f = [&](double x) { return rate(std::exp(x)); };
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  const double tol = std::log1p(1e-4);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  IntensityOptimum out{std::exp(0.5 * (a + b)), 0.0, false};
  out.rate = rate(out.mu);
  if (best_rate > out.rate) {
    out.mu = mu_at(best);
    out.rate = best_rate;
  }
  return out;
}

/// Analytic rate of a variant at a given total intensity; variants without a
/// closed form here (tf_star, npp, sns) return zero.
inline double analytic_rate(ProtocolVariant variant, const ChannelParams& channel, ProtocolConfig config,
                            double mu, const ModelOptions& options = {}) {
  config.signal_intensity = mu;
  // decoys play no role in the asymptotic analytic model
  config.decoy_intensities.clear();
  config.intensity_probs.clear();
  switch (variant) {
    case ProtocolVariant::tf_gllp:
      return tf_gllp_rate(model_detection_stats(channel, config, options), config);
    case ProtocolVariant::pm:
      return pm_rate(model_detection_stats(channel, config, options), config);
    case ProtocolVariant::pm_mdi: {
      const double eta = channel.eta() * channel.detector_efficiency * channel.detector_efficiency;
      return eta > 0.0 ? pmmdi_rate(mu, std::min(eta, 1.0)) : 0.0;
    }
    default: return 0.0;
  }
}

}  // namespace tfqkd
