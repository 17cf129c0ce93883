#pragma once

// Serialized forms of simulation tallies, phase-demo results and rate curves.

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tfqkd/curve.hpp"
#include "tfqkd/estimation.hpp"
#include "tfqkd/format.hpp"
#include "tfqkd/tally.hpp"

namespace tfqkd {

inline nlohmann::json to_json(const Estimate& e) {
  return {{"value", e.value}, {"std_error", e.std_error}, {"successes", e.successes}, {"trials", e.trials}};
}

/// Nonzero cells only, in cell-index order.
inline nlohmann::json tallies_to_json(const TallyTable& t) {
  nlohmann::json cells = nlohmann::json::array();
  t.for_each_nonzero([&](const TallyKey& k, std::uint64_t n) {
    auto intensity = [](std::uint8_t i) -> nlohmann::json {
      if (i == kNoPulse) return "none";
      return i;
    };
    cells.push_back({{"intensity_a", intensity(k.intensity_a)},
                     {"intensity_b", intensity(k.intensity_b)},
                     {"mode_a", k.mode_a},
                     {"mode_b", k.mode_b},
                     {"relation", relation_name(k.relation)},
                     {"bits_equal", k.bits_equal},
                     {"outcome", outcome_name(k.outcome)},
                     {"count", n}});
  });
  return {{"variant", variant_name(t.variant())},
          {"intensities", t.intensities()},
          {"slice_count", t.slice_count()},
          {"total", t.total()},
          {"cells", cells}};
}

inline nlohmann::json stats_to_json(const EstimatedStats& s) {
  nlohmann::json j{{"pulses", s.pulses},
                   {"sifted", s.sifted()},
                   {"sifted_fraction", s.sifted_fraction()},
                   {"gain", to_json(s.gain)},
                   {"qber_z", to_json(s.qber_z)}};
  j["test_gain"] = s.test_gain ? to_json(*s.test_gain) : nlohmann::json(nullptr);
  j["phase_error_x"] = s.phase_error ? to_json(*s.phase_error) : nlohmann::json(nullptr);
  return j;
}

/// Column order of the rate-curve CSV. This header is a stable contract.
inline const std::vector<std::string>& curve_columns() {
  static const std::vector<std::string> cols{"distance_km", "eta",     "plob",   "srb",          "tgw",
                                             "tf_gllp",     "pm",      "pmmdi",  "npp_mc",       "sns_mc",
                                             "opt_mu_tf_gllp", "opt_mu_pm", "opt_mu_pmmdi"};
  return cols;
}

inline std::string curve_to_csv(const std::vector<RateCurvePoint>& points) {
  std::ostringstream out;
  const auto& cols = curve_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  auto get = [](const auto& map, auto key) {
    auto it = map.find(key);
    return it == map.end() ? std::nan("") : it->second;
  };
  for (const auto& p : points) {
    const double row[] = {p.distance_km,
                          p.eta,
                          get(p.bounds, BoundKind::plob),
                          get(p.bounds, BoundKind::srb),
                          get(p.bounds, BoundKind::tgw),
                          get(p.rates, ProtocolVariant::tf_gllp),
                          get(p.rates, ProtocolVariant::pm),
                          get(p.rates, ProtocolVariant::pm_mdi),
                          get(p.rates, ProtocolVariant::npp),
                          get(p.rates, ProtocolVariant::sns),
                          get(p.optimal_mu, ProtocolVariant::tf_gllp),
                          get(p.optimal_mu, ProtocolVariant::pm),
                          get(p.optimal_mu, ProtocolVariant::pm_mdi)};
    for (std::size_t i = 0; i < std::size(row); ++i) out << (i ? "," : "") << format_fixed6(row[i]);
    out << "\n";
  }
  return out.str();
}

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::uint64_t> counts;
};

inline Histogram make_histogram(const std::vector<double>& samples, double lo, double hi, std::size_t bins) {
  Histogram h{lo, hi, std::vector<std::uint64_t>(bins, 0)};
  if (bins == 0 || !(hi > lo)) return h;
  for (double x : samples) {
    if (x < lo || x >= hi) continue;
    auto b = static_cast<std::size_t>((x - lo) / (hi - lo) * static_cast<double>(bins));
    if (b >= bins) b = bins - 1;
    ++h.counts[b];
  }
  return h;
}

}  // namespace tfqkd
