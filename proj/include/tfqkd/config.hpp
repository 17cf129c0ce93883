#pragma once

// Run configuration: an INI file with fixed sections and keys. Every key of
// the schema must be present and unknown keys are rejected.
//
//   [channel]   loss_db_per_km detector_efficiency dark_count_prob misalignment asymmetry_db
//   [protocol]  slice_count signal_intensity decoy_intensities intensity_probs
//               ec_efficiency sifting_factor key_mode_prob
//   [sns]       send_prob test_param test_intensity z_prob test_condition
//   [model]     phase_error bound_reference
//
// List values are comma separated and may be empty.

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "tfqkd/bounds.hpp"
#include "tfqkd/core.hpp"
#include "tfqkd/protocol.hpp"
#include "tfqkd/rates.hpp"

namespace tfqkd {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  ChannelParams channel{};
  ProtocolConfig protocol{};
  ModelOptions model{};
  BoundReference bound_reference = BoundReference::fiber_only;

  /// Reference parameter set: f = 1.15, e_d = 1.5%, p_d = 1e-7, eta_d = 40%,
  /// M = 16, alpha = 0.2 dB/km.
  static RunConfig defaults() {
    RunConfig c;
    c.channel.loss_db_per_km = 0.2;
    c.channel.detector_efficiency = 0.4;
    c.channel.dark_count_prob = 1e-7;
    c.channel.misalignment = 0.015;
    c.protocol.slice_count = 16;
    c.protocol.ec_efficiency = 1.15;
    c.protocol.signal_intensity = 0.1;
    c.protocol.decoy_intensities = {0.02, 0.0};
    c.protocol.sifting_factor = 1.0;
    c.protocol.key_mode_prob = 0.5;
    c.protocol.send_prob = 0.1;
    c.protocol.sns_test_param = 0.1;
    c.protocol.sns_test_intensity = 0.1;
    c.protocol.sns_z_prob = 0.5;
    return c;
  }

  friend bool operator==(const RunConfig& a, const RunConfig& b) {
    auto ch = [](const ChannelParams& c) {
      return std::tie(c.loss_db_per_km, c.detector_efficiency, c.dark_count_prob, c.misalignment, c.asymmetry_db);
    };
    auto pr = [](const ProtocolConfig& p) {
      return std::tie(p.slice_count, p.signal_intensity, p.decoy_intensities, p.intensity_probs, p.ec_efficiency,
                      p.sifting_factor, p.key_mode_prob, p.send_prob, p.sns_test_param, p.sns_test_intensity,
                      p.sns_z_prob, p.sns_condition);
    };
    return ch(a.channel) == ch(b.channel) && pr(a.protocol) == pr(b.protocol) &&
           a.model.phase_error == b.model.phase_error && a.bound_reference == b.bound_reference;
  }
};

namespace detail {

inline const std::map<std::string, std::vector<std::string>>& config_schema() {
  static const std::map<std::string, std::vector<std::string>> schema{
      {"channel", {"loss_db_per_km", "detector_efficiency", "dark_count_prob", "misalignment", "asymmetry_db"}},
      {"protocol",
       {"slice_count", "signal_intensity", "decoy_intensities", "intensity_probs", "ec_efficiency", "sifting_factor",
        "key_mode_prob"}},
      {"sns", {"send_prob", "test_param", "test_intensity", "z_prob", "test_condition"}},
      {"model", {"phase_error", "bound_reference"}},
  };
  return schema;
}

inline double to_number(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": not a number: '" + text + "'");
  }
  while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
  if (used != text.size()) throw ConfigError("config key " + key + ": not a number: '" + text + "'");
  return v;
}

inline std::vector<double> to_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = item.find_last_not_of(" \t");
    out.push_back(to_number(key, item.substr(b, e - b + 1)));
  }
  return out;
}

// shortest %g form that reads back to the same double
inline std::string format_exact(double v) {
  char buf[64];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline std::string format_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += format_exact(v[i]);
  }
  return s;
}

}  // namespace detail

/// Parses and validates a configuration; errors name the offending key.
inline RunConfig parse_config(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax error: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  const auto& schema = detail::config_schema();
  for (const auto& [section, body] : tree) {
    auto it = schema.find(section);
    if (it == schema.end()) throw ConfigError("unknown config section [" + section + "]");
    const std::set<std::string> allowed(it->second.begin(), it->second.end());
    for (const auto& [key, value] : body) {
      if (!allowed.count(key)) throw ConfigError("unknown config key " + section + "." + key);
    }
  }
  auto get = [&](const std::string& section, const std::string& key) -> std::string {
    auto node = tree.get_child_optional(boost::property_tree::ptree::path_type(section + "/" + key, '/'));
    if (!node) throw ConfigError("missing config key " + section + "." + key);
    return node->get_value<std::string>();
  };
  auto num = [&](const std::string& section, const std::string& key) {
    return detail::to_number(section + "." + key, get(section, key));
  };

  RunConfig c;
  c.channel.loss_db_per_km = num("channel", "loss_db_per_km");
  c.channel.detector_efficiency = num("channel", "detector_efficiency");
  c.channel.dark_count_prob = num("channel", "dark_count_prob");
  c.channel.misalignment = num("channel", "misalignment");
  c.channel.asymmetry_db = num("channel", "asymmetry_db");

  const double m = num("protocol", "slice_count");
  if (m != std::floor(m)) throw ConfigError("config key protocol.slice_count: must be an integer");
  c.protocol.slice_count = static_cast<int>(m);
  c.protocol.signal_intensity = num("protocol", "signal_intensity");
  c.protocol.decoy_intensities = detail::to_list("protocol.decoy_intensities", get("protocol", "decoy_intensities"));
  c.protocol.intensity_probs = detail::to_list("protocol.intensity_probs", get("protocol", "intensity_probs"));
  c.protocol.ec_efficiency = num("protocol", "ec_efficiency");
  c.protocol.sifting_factor = num("protocol", "sifting_factor");
  c.protocol.key_mode_prob = num("protocol", "key_mode_prob");

  c.protocol.send_prob = num("sns", "send_prob");
  c.protocol.sns_test_param = num("sns", "test_param");
  c.protocol.sns_test_intensity = num("sns", "test_intensity");
  c.protocol.sns_z_prob = num("sns", "z_prob");
  const auto cond = get("sns", "test_condition");
  if (cond == "as_printed") {
    c.protocol.sns_condition = SnsTestCondition::as_printed;
  } else if (cond == "closeness") {
    c.protocol.sns_condition = SnsTestCondition::closeness;
  } else {
    throw ConfigError("config key sns.test_condition: expected as_printed or closeness, got '" + cond + "'");
  }

  const auto pe = get("model", "phase_error");
  if (pe == "slice_discretization") {
    c.model.phase_error = PhaseErrorModel::slice_discretization;
  } else if (pe == "photon_parity") {
    c.model.phase_error = PhaseErrorModel::photon_parity;
  } else {
    throw ConfigError("config key model.phase_error: expected slice_discretization or photon_parity, got '" + pe + "'");
  }
  const auto br = get("model", "bound_reference");
  if (br == "fiber_only") {
    c.bound_reference = BoundReference::fiber_only;
  } else if (br == "device_included") {
    c.bound_reference = BoundReference::device_included;
  } else {
    throw ConfigError("config key model.bound_reference: expected fiber_only or device_included, got '" + br + "'");
  }

  try {
    c.channel.validate();
    c.protocol.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("config value out of range: ") + e.what());
  }
  return c;
}

inline RunConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

/// Writes every schema key; numbers use 17 significant digits so parsing the
/// result gives back the same values.
inline std::string serialize_config(const RunConfig& c) {
  using detail::format_exact;
  std::ostringstream out;
  out << "[channel]\n"
      << "loss_db_per_km = " << format_exact(c.channel.loss_db_per_km) << "\n"
      << "detector_efficiency = " << format_exact(c.channel.detector_efficiency) << "\n"
      << "dark_count_prob = " << format_exact(c.channel.dark_count_prob) << "\n"
      << "misalignment = " << format_exact(c.channel.misalignment) << "\n"
      << "asymmetry_db = " << format_exact(c.channel.asymmetry_db) << "\n\n"
      << "[protocol]\n"
      << "slice_count = " << c.protocol.slice_count << "\n"
      << "signal_intensity = " << format_exact(c.protocol.signal_intensity) << "\n"
      << "decoy_intensities = " << detail::format_list(c.protocol.decoy_intensities) << "\n"
      << "intensity_probs = " << detail::format_list(c.protocol.intensity_probs) << "\n"
      << "ec_efficiency = " << format_exact(c.protocol.ec_efficiency) << "\n"
      << "sifting_factor = " << format_exact(c.protocol.sifting_factor) << "\n"
      << "key_mode_prob = " << format_exact(c.protocol.key_mode_prob) << "\n\n"
      << "[sns]\n"
      << "send_prob = " << format_exact(c.protocol.send_prob) << "\n"
      << "test_param = " << format_exact(c.protocol.sns_test_param) << "\n"
      << "test_intensity = " << format_exact(c.protocol.sns_test_intensity) << "\n"
      << "z_prob = " << format_exact(c.protocol.sns_z_prob) << "\n"
      << "test_condition = "
      << (c.protocol.sns_condition == SnsTestCondition::as_printed ? "as_printed" : "closeness") << "\n\n"
      << "[model]\n"
      << "phase_error = "
      << (c.model.phase_error == PhaseErrorModel::slice_discretization ? "slice_discretization" : "photon_parity")
      << "\n"
      << "bound_reference = " << (c.bound_reference == BoundReference::fiber_only ? "fiber_only" : "device_included")
      << "\n";
  return out.str();
}

}  // namespace tfqkd
