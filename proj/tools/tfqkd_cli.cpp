// Command-line front end: capacity bounds, rate curves, Monte Carlo runs,
// the experiment comparison table and the phase-noise demonstration.
//
// Exit codes: 0 success, 1 I/O failure, 2 usage or configuration error.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tfqkd/tfqkd.hpp"

namespace {

constexpr int kExitIo = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t default_seed() {
  if (const char* env = std::getenv("TFQKD_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw UsageError(std::string("TFQKD_SEED is not an unsigned integer: ") + env);
    }
  }
  return 42;
}

tfqkd::RunConfig load_config(const std::string& path) {
  if (path.empty()) return tfqkd::RunConfig::defaults();
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  try {
    return tfqkd::parse_config(in);
  } catch (const tfqkd::ConfigError& e) {
    throw UsageError(e.what());
  }
}

/// Writes to `path`, or stdout when it is empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed for " + path);
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// ---- bounds ---------------------------------------------------------------

struct BoundsArgs {
  std::optional<double> eta;
  std::optional<double> length;
  double alpha = 0.2;
  std::string bounds = "plob,srb,tgw";
};

int run_bounds(const BoundsArgs& a) {
  if (a.eta.has_value() == a.length.has_value()) throw UsageError("give exactly one of --eta or --length");
  double eta = 0.0;
  if (a.eta) {
    eta = *a.eta;
  } else {
    if (!(*a.length >= 0.0) || !(a.alpha >= 0.0)) throw UsageError("length and alpha must be >= 0");
    eta = tfqkd::channel_transmittance(*a.length, a.alpha);
  }
  if (!(eta >= 0.0 && eta <= 1.0)) throw UsageError("eta must lie in [0,1], got " + std::to_string(eta));
  std::ostringstream out;
  for (const auto& name : split(a.bounds)) {
    tfqkd::BoundKind kind;
    if (name == "plob") {
      kind = tfqkd::BoundKind::plob;
    } else if (name == "srb") {
      kind = tfqkd::BoundKind::srb;
    } else if (name == "tgw") {
      kind = tfqkd::BoundKind::tgw;
    } else {
      throw UsageError("unknown bound '" + name + "' (expected plob, srb, tgw)");
    }
    out << name << "," << tfqkd::format_fixed6(tfqkd::bound_or_sentinel(kind, eta)) << "\n";
  }
  emit("", out.str());
  return 0;
}

// ---- rate-curve -----------------------------------------------------------

struct CurveArgs {
  std::string config;
  double from = 0.0;
  double to = 600.0;
  double step = 10.0;
  std::string output;
  std::uint64_t mc_pulses = 1000000;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
};

int run_rate_curve(const CurveArgs& a) {
  const auto cfg = load_config(a.config);
  if (!(a.step > 0.0)) throw UsageError("--step must be > 0");
  std::vector<double> distances;
  for (long i = 0;; ++i) {
    const double d = a.from + a.step * static_cast<double>(i);
    if (d > a.to + 1e-9) break;
    distances.push_back(d);
  }
  tfqkd::CurveOptions opt;
  opt.bound_reference = cfg.bound_reference;
  opt.model = cfg.model;
  opt.mc_pulses = a.mc_pulses;
  opt.seed = a.seed.value_or(default_seed());
  opt.threads = a.threads;
  opt.sns_config = cfg.protocol;
  opt.sns_config.variant = tfqkd::ProtocolVariant::sns;
  std::vector<tfqkd::ProtocolVariant> protocols{tfqkd::ProtocolVariant::tf_gllp, tfqkd::ProtocolVariant::pm,
                                                tfqkd::ProtocolVariant::pm_mdi};
  if (a.mc_pulses > 0) {
    protocols.push_back(tfqkd::ProtocolVariant::npp);
    protocols.push_back(tfqkd::ProtocolVariant::sns);
  }
  const auto points = tfqkd::generate_rate_curve(cfg.channel, distances, protocols, cfg.protocol, opt);
  emit(a.output, tfqkd::curve_to_csv(points));
  if (!a.output.empty() && a.output != "-") {
    std::cout << "wrote " << points.size() << " rows to " << a.output << " (seed=" << opt.seed
              << ", mc_pulses=" << a.mc_pulses << ")\n";
  }
  return 0;
}

// ---- simulate -------------------------------------------------------------

struct SimulateArgs {
  std::string protocol = "tf";
  std::string config;
  double length = 100.0;
  std::uint64_t pulses = 1000000;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  double drift = 0.0;
  double clock_rate = 1e9;
  std::string output;
};

int run_simulate(const SimulateArgs& a) {
  auto cfg = load_config(a.config);
  tfqkd::ProtocolVariant variant;
  if (a.protocol == "tf") {
    variant = tfqkd::ProtocolVariant::tf_star;
  } else if (a.protocol == "pm") {
    variant = tfqkd::ProtocolVariant::pm;
  } else if (a.protocol == "npp") {
    variant = tfqkd::ProtocolVariant::npp;
  } else if (a.protocol == "sns") {
    variant = tfqkd::ProtocolVariant::sns;
  } else {
    throw UsageError("unknown protocol '" + a.protocol + "' (expected tf, pm, npp, sns)");
  }
  if (!(a.length >= 0.0)) throw UsageError("--length must be >= 0");
  if (!(a.drift >= 0.0) || !(a.clock_rate > 0.0)) throw UsageError("--drift must be >= 0 and --clock-rate > 0");
  cfg.channel.length_km = a.length;
  cfg.protocol.variant = variant;
  const std::uint64_t seed = a.seed.value_or(default_seed());

  tfqkd::SimulationOptions sim;
  sim.threads = a.threads;
  sim.clock_rate_hz = a.clock_rate;
  if (a.drift > 0.0) {
    const double duration_ms = static_cast<double>(a.pulses) / a.clock_rate * 1e3;
    sim.drift = tfqkd::sample_phase_path({a.drift, 1.0, 0.0}, duration_ms, tfqkd::mix64(seed + 1));
  }
  const auto table = tfqkd::run_protocol(cfg.channel, cfg.protocol, a.pulses, seed, sim);

  nlohmann::json report;
  report["protocol"] = a.protocol;
  report["seed"] = seed;
  report["pulses"] = a.pulses;
  report["length_km"] = a.length;
  report["drift_rad_per_ms"] = a.drift;
  report["tallies"] = tfqkd::tallies_to_json(table);
  double rate = 0.0;
  try {
    const auto stats = tfqkd::tallies_to_stats(table);
    report["stats"] = tfqkd::stats_to_json(stats);
    rate = tfqkd::mc_rate(stats, cfg.protocol);
  } catch (const tfqkd::EmptyGroupError& e) {
    report["stats"] = nullptr;
    report["note"] = e.what();
  }
  report["rate_formula"] = variant == tfqkd::ProtocolVariant::pm ? "phase_matching" : "one_way_skeleton";
  report["rate"] = rate;
  emit(a.output, report.dump(2) + "\n");
  return 0;
}

// ---- table1 ---------------------------------------------------------------

struct TableArgs {
  std::string output;
  double alpha = 0.2;
  double detector_efficiency = 0.4;
};

int run_table1(const TableArgs& a) {
  if (!(a.alpha >= 0.0) || !(a.detector_efficiency > 0.0 && a.detector_efficiency <= 1.0))
    throw UsageError("--alpha must be >= 0 and --detector-efficiency in (0,1]");
  std::ostringstream out;
  out << "reference,protocol,clock_rate,fiber_km,attenuation_db,loss_db,key_rate,finite_size,"
         "plob_absolute,plob_device,beats_absolute,beats_device\n";
  for (const auto& rec : tfqkd::kExperiments) {
    const auto c = tfqkd::compare_experiment(rec, a.alpha, a.detector_efficiency);
    auto opt = [](const std::optional<double>& v) { return v ? tfqkd::format_fixed6(*v) : std::string("-"); };
    char rate[32];
    std::snprintf(rate, sizeof rate, "%.2e", rec.key_rate_per_pulse);
    out << rec.reference << "," << rec.protocol << "," << rec.clock_rate << "," << opt(rec.fiber_km) << ","
        << opt(rec.attenuation_db) << "," << tfqkd::format_fixed6(c.loss_db) << "," << rate << ","
        << (rec.finite_size ? "yes" : "no") << "," << tfqkd::format_fixed6(c.plob_absolute) << ","
        << tfqkd::format_fixed6(c.plob_device) << "," << (c.beats_absolute ? "yes" : "no") << ","
        << (c.beats_device ? "yes" : "no") << "\n";
  }
  emit(a.output, out.str());
  return 0;
}

// ---- phase-demo -----------------------------------------------------------

struct PhaseArgs {
  std::optional<double> drift;
  std::optional<double> length;
  double window_ms = 1.0;
  double duration_ms = 1000.0;
  double signal_us = 50.0;
  double reference_us = 50.0;
  double recovery_us = 0.0;
  std::string mode = "both";
  std::string estimator = "perfect";
  std::uint64_t reference_clicks = 10000;
  std::size_t bins = 64;
  std::optional<std::uint64_t> seed;
  std::string output;
};

int run_phase_demo(const PhaseArgs& a) {
  if (a.drift.has_value() && a.length.has_value()) throw UsageError("give at most one of --drift or --length");
  std::vector<tfqkd::CompensationMode> modes;
  if (a.mode == "active") {
    modes = {tfqkd::CompensationMode::active_npp};
  } else if (a.mode == "post_select") {
    modes = {tfqkd::CompensationMode::post_select};
  } else if (a.mode == "both") {
    modes = {tfqkd::CompensationMode::active_npp, tfqkd::CompensationMode::post_select};
  } else {
    throw UsageError("unknown mode '" + a.mode + "' (expected active, post_select, both)");
  }
  tfqkd::Estimator est;
  if (a.estimator == "perfect") {
    est.kind = tfqkd::Estimator::Kind::perfect;
  } else if (a.estimator == "shot_noise") {
    est.kind = tfqkd::Estimator::Kind::shot_noise;
    est.reference_clicks = a.reference_clicks;
  } else {
    throw UsageError("unknown estimator '" + a.estimator + "' (expected perfect, shot_noise)");
  }
  double rate = 6.0;
  if (a.drift) rate = *a.drift;
  if (a.length) rate = tfqkd::drift_rate_for_length(*a.length);
  if (!(rate >= 0.0) || !(a.window_ms > 0.0) || !(a.duration_ms >= 0.0)) throw UsageError("invalid drift settings");

  tfqkd::PulseTrainSchedule schedule;
  schedule.signal_us = a.signal_us;
  schedule.reference_us = a.reference_us;
  schedule.recovery_us = a.recovery_us;
  try {
    schedule.validate();
  } catch (const tfqkd::DomainError& e) {
    throw UsageError(e.what());
  }
  const std::uint64_t seed = a.seed.value_or(default_seed());
  const auto path = tfqkd::sample_phase_path({rate, a.window_ms, 0.0}, a.duration_ms, seed);

  nlohmann::json report;
  report["drift_rad_per_ms"] = rate;
  report["window_ms"] = a.window_ms;
  report["duration_ms"] = a.duration_ms;
  report["schedule"] = {{"signal_us", a.signal_us}, {"reference_us", a.reference_us}, {"recovery_us", a.recovery_us}};
  report["estimator"] = a.estimator;
  report["seed"] = seed;
  report["modes"] = nlohmann::json::object();
  for (auto mode : modes) {
    const auto residual = tfqkd::apply_compensation(mode, path, schedule, est, seed);
    const double eps = residual.empty() ? 0.0 : tfqkd::interference_error(tfqkd::SampledPhase{residual});
    double sum2 = 0.0;
    for (double r : residual) sum2 += r * r;
    const double rms = residual.empty() ? 0.0 : std::sqrt(sum2 / static_cast<double>(residual.size()));
    std::vector<double> wrapped(residual.size());
    std::transform(residual.begin(), residual.end(), wrapped.begin(),
                   [](double r) { return std::remainder(r, tfqkd::kTwoPi); });
    const auto hist = tfqkd::make_histogram(wrapped, -std::numbers::pi, std::numbers::pi, a.bins);
    report["modes"][mode == tfqkd::CompensationMode::active_npp ? "active" : "post_select"] = {
        {"samples", residual.size()},
        {"residual_rms_rad", rms},
        {"epsilon", eps},
        {"histogram", {{"lo", hist.lo}, {"hi", hist.hi}, {"counts", hist.counts}}}};
  }
  emit(a.output, report.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Twin-field QKD key-rate analysis and Monte Carlo simulation"};
  app.require_subcommand(1);

  BoundsArgs bounds;
  auto* cb = app.add_subcommand("bounds", "Evaluate PLOB / SRB / TGW bounds");
  cb->add_option("--eta", bounds.eta, "Channel transmittance");
  cb->add_option("--length", bounds.length, "Fiber length in km");
  cb->add_option("--alpha", bounds.alpha, "Fiber loss in dB/km")->capture_default_str();
  cb->add_option("--bounds", bounds.bounds, "Comma-separated subset of plob,srb,tgw")->capture_default_str();

  CurveArgs curve;
  auto* cc = app.add_subcommand("rate-curve", "Write the rate-versus-distance CSV");
  cc->add_option("--config", curve.config, "Configuration file (defaults to the built-in reference parameters)");
  cc->add_option("--from", curve.from, "First distance in km")->capture_default_str();
  cc->add_option("--to", curve.to, "Last distance in km")->capture_default_str();
  cc->add_option("--step", curve.step, "Distance step in km")->capture_default_str();
  cc->add_option("--output,-o", curve.output, "Output CSV path (stdout if omitted)");
  cc->add_option("--mc-pulses", curve.mc_pulses, "Pulses per Monte Carlo point (0 disables npp_mc/sns_mc)")
      ->capture_default_str();
  cc->add_option("--seed", curve.seed, "Monte Carlo seed (default: $TFQKD_SEED or 42)");
  cc->add_option("--threads", curve.threads, "Worker threads")->capture_default_str();

  SimulateArgs sim;
  auto* cs = app.add_subcommand("simulate", "Run a pulse-level Monte Carlo and report tallies");
  cs->add_option("--protocol", sim.protocol, "tf, pm, npp or sns")->capture_default_str();
  cs->add_option("--config", sim.config, "Configuration file");
  cs->add_option("--length", sim.length, "Fiber length in km")->capture_default_str();
  cs->add_option("--pulses", sim.pulses, "Number of pulse pairs")->capture_default_str();
  cs->add_option("--seed", sim.seed, "Seed (default: $TFQKD_SEED or 42)");
  cs->add_option("--threads", sim.threads, "Worker threads")->capture_default_str();
  cs->add_option("--drift", sim.drift, "Channel phase drift-rate std in rad/ms")->capture_default_str();
  cs->add_option("--clock-rate", sim.clock_rate, "Pulse rate in Hz")->capture_default_str();
  cs->add_option("--output,-o", sim.output, "Report path (stdout if omitted)");

  TableArgs table;
  auto* ct = app.add_subcommand("table1", "Compare reported experiments with PLOB at their loss");
  ct->add_option("--output,-o", table.output, "Output path (stdout if omitted)");
  ct->add_option("--alpha", table.alpha, "Fiber loss for distance rows, dB/km")->capture_default_str();
  ct->add_option("--detector-efficiency", table.detector_efficiency, "Detector efficiency for the device bound")
      ->capture_default_str();

  PhaseArgs phase;
  auto* cp = app.add_subcommand("phase-demo", "Residual phase error after reference-pulse compensation");
  cp->add_option("--drift", phase.drift, "Drift-rate std in rad/ms (default 6.0)");
  cp->add_option("--length", phase.length, "Fiber length in km; drift rate from the measured anchors");
  cp->add_option("--window-ms", phase.window_ms, "Drift-rate window")->capture_default_str();
  cp->add_option("--duration-ms", phase.duration_ms, "Simulated time")->capture_default_str();
  cp->add_option("--signal-us", phase.signal_us, "Signal block length")->capture_default_str();
  cp->add_option("--reference-us", phase.reference_us, "Reference block length")->capture_default_str();
  cp->add_option("--recovery-us", phase.recovery_us, "Detector recovery gap")->capture_default_str();
  cp->add_option("--mode", phase.mode, "active, post_select or both")->capture_default_str();
  cp->add_option("--estimator", phase.estimator, "perfect or shot_noise")->capture_default_str();
  cp->add_option("--reference-clicks", phase.reference_clicks, "Clicks per reference block (shot_noise)")
      ->capture_default_str();
  cp->add_option("--bins", phase.bins, "Histogram bins")->capture_default_str();
  cp->add_option("--seed", phase.seed, "Seed (default: $TFQKD_SEED or 42)");
  cp->add_option("--output,-o", phase.output, "Report path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (cb->parsed()) return run_bounds(bounds);
    if (cc->parsed()) return run_rate_curve(curve);
    if (cs->parsed()) return run_simulate(sim);
    if (ct->parsed()) return run_table1(table);
    if (cp->parsed()) return run_phase_demo(phase);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const tfqkd::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}
