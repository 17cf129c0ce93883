#pragma once

// Fiber phase drift, reference-pulse phase estimation and compensation, and
// the mapping from residual phase to interference error eps = (1 - V)/2.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <variant>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "tfqkd/core.hpp"
#include "tfqkd/rng.hpp"

namespace tfqkd {

/// Zero-mean Gaussian drift rate, redrawn every window.
struct DriftModel {
  double rate_std_rad_per_ms = 0.0;
  double window_ms = 1.0;
  double initial_phase = 0.0;

  void validate() const {
    if (!(rate_std_rad_per_ms >= 0.0)) throw DomainError("drift rate std must be >= 0");
    if (!(window_ms > 0.0)) throw DomainError("drift window must be > 0");
  }
};

/// Continuous piecewise-linear phase trajectory (unwrapped, radians).
class PhasePath {
 public:
  PhasePath() = default;
  PhasePath(double initial_phase, double window_ms, double duration_ms, std::vector<double> rates)
      : initial_(initial_phase), window_ms_(window_ms), duration_ms_(duration_ms), rates_(std::move(rates)) {
    starts_.reserve(rates_.size() + 1);
    double phase = initial_;
    starts_.push_back(phase);
    for (double r : rates_) {
      phase += r * window_ms_;
      starts_.push_back(phase);
    }
  }

  double initial_phase() const { return initial_; }
  double duration_ms() const { return duration_ms_; }
  double window_ms() const { return window_ms_; }
  const std::vector<double>& window_rates() const { return rates_; }

  /// Phase at time t (ms); clamped to [0, duration].
  double at(double t_ms) const {
    if (rates_.empty()) return initial_;
    t_ms = std::clamp(t_ms, 0.0, duration_ms_);
    auto k = static_cast<std::size_t>(t_ms / window_ms_);
    if (k >= rates_.size()) k = rates_.size() - 1;
    return starts_[k] + rates_[k] * (t_ms - static_cast<double>(k) * window_ms_);
  }

  /// Exact mean phase over [t0, t1].
  double mean_over(double t0, double t1) const {
    if (t1 <= t0) return at(t0);
    // piecewise linear: integrate over window pieces
    double integral = 0.0;
    double a = t0;
    while (a < t1) {
      const auto k = std::min(static_cast<std::size_t>(a / window_ms_), rates_.empty() ? 0 : rates_.size() - 1);
      double b = std::min(t1, static_cast<double>(k + 1) * window_ms_);
      if (b <= a) b = t1;
      integral += 0.5 * (at(a) + at(b)) * (b - a);
      a = b;
    }
    return integral / (t1 - t0);
  }

 private:
  double initial_ = 0.0;
  double window_ms_ = 1.0;
  double duration_ms_ = 0.0;
  std::vector<double> rates_{};
  std::vector<double> starts_{};
};

inline PhasePath sample_phase_path(const DriftModel& model, double duration_ms, std::uint64_t seed) {
  model.validate();
  if (!(duration_ms >= 0.0)) throw DomainError("duration must be >= 0");
  const auto windows = static_cast<std::size_t>(std::ceil(duration_ms / model.window_ms));
  std::vector<double> rates(windows, 0.0);
  if (model.rate_std_rad_per_ms > 0.0) {
    std::mt19937_64 gen(mix64(seed));
    std::normal_distribution<double> normal(0.0, model.rate_std_rad_per_ms);
    for (auto& r : rates) r = normal(gen);
  }
  return PhasePath(model.initial_phase, model.window_ms, duration_ms, std::move(rates));
}

struct DriftAnchor {
  double length_km;
  double rate_rad_per_ms;
};

/// Measured drift-rate anchors. 0 km and 509 km are the standard deviations of
/// the laser-drift histograms; the others are fiber drift measurements.
inline const std::vector<DriftAnchor>& drift_anchors() {
  static const std::vector<DriftAnchor> anchors{
      {0.0, 2.72}, {200.0, 2.8}, {400.0, 5.5}, {509.0, 9.58}, {600.0, 7.1}, {800.0, 15.7}};
  return anchors;
}

/// Pool-adjacent-violators fit of non-decreasing values (equal weights).
inline std::vector<double> isotonic_fit(const std::vector<double>& values) {
  struct Block {
    double sum;
    std::size_t n;
    double mean() const { return sum / static_cast<double>(n); }
  };
  std::vector<Block> blocks;
  for (double v : values) {
    blocks.push_back({v, 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() > blocks.back().mean()) {
      Block last = blocks.back();
      blocks.pop_back();
      blocks.back().sum += last.sum;
      blocks.back().n += last.n;
    }
  }
  std::vector<double> fitted;
  for (const auto& b : blocks) fitted.insert(fitted.end(), b.n, b.mean());
  return fitted;
}

/// Monotone drift-rate model: isotonic fit through the anchors, linear between
/// them, constant beyond the last one.
inline double drift_rate_for_length(double length_km, const std::vector<DriftAnchor>& anchors = drift_anchors()) {
  if (!(length_km >= 0.0)) throw DomainError("length must be >= 0");
  if (anchors.empty()) throw DomainError("no drift anchors");
  std::vector<DriftAnchor> sorted = anchors;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const DriftAnchor& a, const DriftAnchor& b) { return a.length_km < b.length_km; });
  std::vector<double> values;
  for (const auto& a : sorted) values.push_back(a.rate_rad_per_ms);
  const auto fitted = isotonic_fit(values);
  if (length_km <= sorted.front().length_km) return fitted.front();
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (length_km <= sorted[i].length_km) {
      const double x0 = sorted[i - 1].length_km;
      const double x1 = sorted[i].length_km;
      const double w = (length_km - x0) / (x1 - x0);
      return fitted[i - 1] + w * (fitted[i] - fitted[i - 1]);
    }
  }
  return fitted.back();
}

// Distribution descriptors for the residual phase difference.
struct DeterministicPhase {
  double value = 0.0;
};
struct GaussianPhase {
  double mean = 0.0;
  double sigma = 0.0;
};
struct UniformPhase {
  double lo = 0.0;
  double hi = 0.0;
};
struct SampledPhase {
  std::vector<double> samples;
};
using PhaseDistribution = std::variant<DeterministicPhase, GaussianPhase, UniformPhase, SampledPhase>;

/// eps = E[(1 - cos dphi)/2] = E[I1/(I0+I1)].
inline double interference_error(const PhaseDistribution& dist) {
  auto err = [](double x) { return 0.5 * (1.0 - std::cos(x)); };
  auto quad = [](auto f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, 1e-12);
  };
  struct Visitor {
    decltype(err)& e;
    decltype(quad)& q;
    double operator()(const DeterministicPhase& d) const { return e(d.value); }
    double operator()(const GaussianPhase& g) const {
      if (!(g.sigma >= 0.0)) throw DomainError("gaussian sigma must be >= 0");
      if (g.sigma == 0.0) return e(g.mean);
      const double norm = 1.0 / (g.sigma * std::sqrt(kTwoPi));
      auto f = [&](double x) {
        const double z = (x - g.mean) / g.sigma;
        return e(x) * norm * std::exp(-0.5 * z * z);
      };
      // split so each piece sees a few oscillations at most
      const double span = 12.0 * g.sigma;
      const int pieces = std::max(2, static_cast<int>(std::ceil(2.0 * span / std::numbers::pi)));
      double sum = 0.0;
      for (int i = 0; i < pieces; ++i) {
        const double a = g.mean - span + 2.0 * span * i / pieces;
        const double b = g.mean - span + 2.0 * span * (i + 1) / pieces;
        sum += q(f, a, b);
      }
      return sum;
    }
    double operator()(const UniformPhase& u) const {
      if (!(u.hi >= u.lo)) throw DomainError("uniform phase needs hi >= lo");
      if (u.hi == u.lo) return e(u.lo);
      return q(e, u.lo, u.hi) / (u.hi - u.lo);
    }
    double operator()(const SampledPhase& s) const {
      if (s.samples.empty()) throw DomainError("no phase samples");
      double sum = 0.0;
      for (double x : s.samples) sum += e(x);
      return sum / static_cast<double>(s.samples.size());
    }
  };
  return std::visit(Visitor{err, quad}, dist);
}

/// Click counts from a block of bright reference pulses. Half of the block
/// carries no extra modulation, the other half a known pi/2 shift.
struct ReferenceCounts {
  std::uint64_t d0 = 0;
  std::uint64_t d1 = 0;
  std::uint64_t quadrature_d0 = 0;
  std::uint64_t quadrature_d1 = 0;
};

struct PhaseEstimate {
  double phase = 0.0;       // in (-pi, pi]
  double std_error = 0.0;   // binomial error propagation
};

/// |dphi| = arccos((n0-n1)/(n0+n1)); the sign comes from the quadrature half,
/// where the D0 fraction is (1 + sin dphi)/2.
inline PhaseEstimate estimate_phase_offset(const ReferenceCounts& counts) {
  const std::uint64_t total = counts.d0 + counts.d1;
  if (total == 0) throw DomainError("estimate_phase_offset: no reference clicks");
  const double n = static_cast<double>(total);
  const double c = std::clamp((static_cast<double>(counts.d0) - static_cast<double>(counts.d1)) / n, -1.0, 1.0);
  double magnitude = std::acos(c);
  if (counts.quadrature_d1 > counts.quadrature_d0) magnitude = -magnitude;
  // Var(c) = (1 - c^2)/n and |d acos/dc| = 1/sqrt(1 - c^2)
  return {magnitude, 1.0 / std::sqrt(n)};
}

/// Reference clicks drawn from the interference model for a true offset.
inline ReferenceCounts simulate_reference_counts(double delta_phi, std::uint64_t pulses, std::uint64_t seed) {
  std::mt19937_64 gen(mix64(seed));
  const std::uint64_t in_phase = pulses - pulses / 2;
  const std::uint64_t quad = pulses / 2;
  std::binomial_distribution<std::uint64_t> b0(in_phase, 0.5 * (1.0 + std::cos(delta_phi)));
  std::binomial_distribution<std::uint64_t> bq(quad, 0.5 * (1.0 + std::sin(delta_phi)));
  ReferenceCounts c;
  c.d0 = b0(gen);
  c.d1 = in_phase - c.d0;
  c.quadrature_d0 = bq(gen);
  c.quadrature_d1 = quad - c.quadrature_d0;
  return c;
}

/// One period: signal block, bright reference block, detector recovery.
struct PulseTrainSchedule {
  double signal_us = 50.0;
  double reference_us = 50.0;
  double recovery_us = 0.0;
  double reference_intensity = 1e4;  // reference pulses contributing clicks per block
  std::uint32_t signal_samples = 50; // residual samples taken per signal block

  void validate() const {
    if (!(signal_us > 0.0) || !(reference_us > 0.0) || !(recovery_us >= 0.0))
      throw DomainError("pulse-train durations must be positive");
    if (signal_samples == 0) throw DomainError("signal_samples must be > 0");
  }

  double period_us() const { return signal_us + reference_us + recovery_us; }

  struct DutyCycle {
    double signal, reference, recovery;
  };
  DutyCycle duty_cycle() const {
    const double p = period_us();
    return {signal_us / p, reference_us / p, recovery_us / p};
  }
};

enum class CompensationMode { active_npp, post_select };

struct Estimator {
  enum class Kind { perfect, shot_noise } kind = Kind::perfect;
  std::uint64_t reference_clicks = 10000;  // per reference block, shot-noise estimator only
};

/// Residual phase differences sampled across all compensated signal blocks.
/// Active mode subtracts the estimate of the previous period's reference
/// block; post-select mode interpolates between the reference blocks on either
/// side of the signal block.
inline std::vector<double> apply_compensation(CompensationMode mode, const PhasePath& path,
                                              const PulseTrainSchedule& schedule, const Estimator& estimator = {},
                                              std::uint64_t seed = 0) {
  schedule.validate();
  const double period_ms = schedule.period_us() * 1e-3;
  const double signal_ms = schedule.signal_us * 1e-3;
  const double ref_ms = schedule.reference_us * 1e-3;
  const auto periods = static_cast<std::size_t>(std::floor(path.duration_ms() / period_ms + 1e-9));

  auto reference_estimate = [&](std::size_t k) {
    const double t0 = static_cast<double>(k) * period_ms + signal_ms;
    const double truth = path.mean_over(t0, t0 + ref_ms);
    if (estimator.kind == Estimator::Kind::perfect) return truth;
    // estimate the wrapped offset, then unwrap next to the true value
    const auto counts = simulate_reference_counts(truth, estimator.reference_clicks, mix64(seed ^ (k + 1)));
    const double est = estimate_phase_offset(counts).phase;
    const double wrapped_truth = std::remainder(truth, kTwoPi);
    return truth + std::remainder(est - wrapped_truth, kTwoPi);
  };
  auto reference_mid = [&](std::size_t k) { return static_cast<double>(k) * period_ms + signal_ms + 0.5 * ref_ms; };

  std::vector<double> residuals;
  if (periods < 2) return residuals;
  residuals.reserve((periods - 1) * schedule.signal_samples);
  double previous = reference_estimate(0);
  for (std::size_t k = 1; k < periods; ++k) {
    const double current = reference_estimate(k);
    for (std::uint32_t j = 0; j < schedule.signal_samples; ++j) {
      const double t = static_cast<double>(k) * period_ms + (j + 0.5) * signal_ms / schedule.signal_samples;
      double correction = previous;
      if (mode == CompensationMode::post_select) {
        const double t_prev = reference_mid(k - 1);
        const double t_next = reference_mid(k);
        correction = previous + (current - previous) * (t - t_prev) / (t_next - t_prev);
      }
      residuals.push_back(path.at(t) - correction);
    }
    previous = current;
  }
  return residuals;
}

}  // namespace tfqkd
