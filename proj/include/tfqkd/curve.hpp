#pragma once

// Rate-versus-distance curves: bounds, intensity-optimized analytic rates and
// Monte-Carlo-fed rates for the protocols without a closed form.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <thread>
#include <vector>

#include "tfqkd/bounds.hpp"
#include "tfqkd/engine.hpp"
#include "tfqkd/estimation.hpp"
#include "tfqkd/rates.hpp"

namespace tfqkd {

struct RateCurvePoint {
  double distance_km = 0.0;
  double eta = 1.0;
  std::map<ProtocolVariant, double> rates;
  std::map<BoundKind, double> bounds;
  std::map<ProtocolVariant, double> optimal_mu;
};

struct CurveOptions {
  std::vector<BoundKind> bounds{BoundKind::plob, BoundKind::srb, BoundKind::tgw};
  BoundReference bound_reference = BoundReference::fiber_only;
  ModelOptions model{};
  std::uint64_t mc_pulses = 0;  // 0 disables the Monte Carlo protocols
  std::uint64_t seed = 1;
  unsigned threads = 1;
  ProtocolConfig sns_config{};  // used for the sns column
};

inline bool is_analytic(ProtocolVariant v) {
  return v == ProtocolVariant::tf_gllp || v == ProtocolVariant::pm || v == ProtocolVariant::pm_mdi;
}

inline RateCurvePoint rate_curve_point(const ChannelParams& channel, double distance_km,
                                       const std::vector<ProtocolVariant>& protocols, const ProtocolConfig& config,
                                       const CurveOptions& options) {
  ChannelParams ch = channel;
  ch.length_km = distance_km;
  ch.validate();
  RateCurvePoint p;
  p.distance_km = distance_km;
  p.eta = ch.eta();
  double bound_eta = p.eta;
  if (options.bound_reference == BoundReference::device_included) bound_eta *= ch.detector_efficiency;
  for (auto b : options.bounds) p.bounds[b] = bound_or_sentinel(b, bound_eta);

  for (auto v : protocols) {
    if (is_analytic(v)) {
      const auto opt = optimize_intensity([&](double mu) { return analytic_rate(v, ch, config, mu, options.model); });
      p.rates[v] = opt.rate;
      p.optimal_mu[v] = opt.mu;
    } else if (options.mc_pulses > 0) {
      ProtocolConfig c = v == ProtocolVariant::sns ? options.sns_config : config;
      c.variant = v;
      SimulationOptions sim;
      const auto table = run_protocol(ch, c, options.mc_pulses, options.seed, sim);
      double rate = 0.0;
      try {
        rate = mc_rate(tallies_to_stats(table), c);
      } catch (const EmptyGroupError&) {
        rate = 0.0;  // nothing detected at this distance
      }
      p.rates[v] = rate;
      p.optimal_mu[v] = c.signal_intensity;
    }
  }
  return p;
}

/// One point per distance, in the given order; independent of `threads`.
inline std::vector<RateCurvePoint> generate_rate_curve(const ChannelParams& channel,
                                                       const std::vector<double>& distances,
                                                       const std::vector<ProtocolVariant>& protocols,
                                                       const ProtocolConfig& config, const CurveOptions& options = {}) {
  if (!std::is_sorted(distances.begin(), distances.end())) throw DomainError("distances must be sorted ascending");
  std::vector<RateCurvePoint> out(distances.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < distances.size(); i = next++) {
      out[i] = rate_curve_point(channel, distances[i], protocols, config, options);
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(distances.size())));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return out;
}

/// Least-squares slope of log10(y) against x over points with y > 0.
inline double log10_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (!(y[i] > 0.0) || !std::isfinite(y[i])) continue;
    const double ly = std::log10(y[i]);
    sx += x[i];
    sy += ly;
    sxx += x[i] * x[i];
    sxy += x[i] * ly;
    ++n;
  }
  if (n < 2) throw DomainError("log10_slope: need at least two positive points");
  const double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

}  // namespace tfqkd
