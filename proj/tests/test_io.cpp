#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "tfqkd/config.hpp"
#include "tfqkd/curve.hpp"
#include "tfqkd/format.hpp"
#include "tfqkd/report.hpp"
#include "tfqkd/statistics.hpp"
#include "tfqkd/table1.hpp"

using namespace tfqkd;

namespace {

std::string default_text() { return serialize_config(RunConfig::defaults()); }

std::string drop_line(const std::string& text, const std::string& prefix) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.rfind(prefix, 0) == 0) continue;
    out += line + "\n";
  }
  return out;
}

std::string config_error(const std::string& text) {
  try {
    parse_config_string(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, RoundTripIsIdentity) {
  const auto a = RunConfig::defaults();
  const auto b = parse_config_string(serialize_config(a));
  EXPECT_TRUE(a == b);
  EXPECT_EQ(serialize_config(b), serialize_config(a));

  RunConfig c = a;
  c.channel.asymmetry_db = 3.3;
  c.protocol.intensity_probs = {0.8, 0.1, 0.1};
  c.protocol.sns_condition = SnsTestCondition::closeness;
  c.protocol.signal_intensity = 0.1 + 1e-16;
  c.model.phase_error = PhaseErrorModel::photon_parity;
  c.bound_reference = BoundReference::device_included;
  const auto d = parse_config_string(serialize_config(c));
  EXPECT_TRUE(c == d);
  EXPECT_EQ(d.protocol.signal_intensity, c.protocol.signal_intensity);
}

TEST(Config, ShippedFileEqualsDefaults) {
  std::ifstream in(std::string(TFQKD_SOURCE_DIR) + "/configs/default.ini");
  ASSERT_TRUE(in);
  EXPECT_TRUE(parse_config(in) == RunConfig::defaults());
}

TEST(Config, MissingKeyIsNamed) {
  const auto msg = config_error(drop_line(default_text(), "misalignment"));
  EXPECT_NE(msg.find("channel.misalignment"), std::string::npos) << msg;
}

TEST(Config, UnknownKeyIsNamed) {
  auto text = default_text();
  text.insert(text.find("[protocol]") + 11, "slice_cuont = 16\n");
  const auto msg = config_error(text);
  EXPECT_NE(msg.find("protocol.slice_cuont"), std::string::npos) << msg;
  EXPECT_NE(config_error(default_text() + "[extra]\nx = 1\n").find("[extra]"), std::string::npos);
}

TEST(Config, BadValuesAreRejected) {
  auto replace = [](std::string text, const std::string& from, const std::string& to) {
    text.replace(text.find(from), from.size(), to);
    return text;
  };
  const auto base = default_text();
  EXPECT_NE(config_error(replace(base, "slice_count = 16", "slice_count = 15")).find("slice"), std::string::npos);
  EXPECT_NE(config_error(replace(base, "slice_count = 16", "slice_count = 16.5")).find("integer"), std::string::npos);
  EXPECT_NE(config_error(replace(base, "misalignment = 0.015", "misalignment = abc")).find("channel.misalignment"),
            std::string::npos);
  EXPECT_NE(config_error(replace(base, "test_condition = as_printed", "test_condition = near")).find("test_condition"),
            std::string::npos);
  EXPECT_NE(config_error(replace(base, "decoy_intensities = 0.02, 0", "decoy_intensities = 0.2, 0")),
            "");
  EXPECT_NE(config_error("[channel\n"), "");
}

TEST(Format, FixedSixSignificant) {
  EXPECT_EQ(format_fixed6(1.0), "1.00000");
  EXPECT_EQ(format_fixed6(1.4427e-10), "0.000000000144270");
  EXPECT_EQ(format_fixed6(123456.7), "123457");
  EXPECT_EQ(format_fixed6(0.0144996), "0.0144996");
  EXPECT_EQ(format_fixed6(9.999996), "10.0000");
  EXPECT_EQ(format_fixed6(-0.5), "-0.500000");
  EXPECT_EQ(format_fixed6(0.0), "0.00000");
  EXPECT_EQ(format_fixed6(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_fixed6(std::nan("")), "nan");
}

TEST(Table1, SevenRowsInOrder) {
  ASSERT_EQ(kExperiments.size(), 7u);
  const std::array<std::string_view, 7> refs{"Minder et al., 2019", "Wang et al., 2019", "Liu et al., 2019",
                                             "Zhong et al., 2019",  "Fang et al., 2020", "Chen et al., 2020",
                                             "Zhong et al., 2020"};
  for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(kExperiments[i].reference, refs[i]);
  EXPECT_EQ(kExperiments[4].fiber_km, 502.0);
  EXPECT_EQ(kExperiments[4].key_rate_per_pulse, 8.43e-10);
  EXPECT_EQ(kExperiments[0].attenuation_db, 90.8);
}

TEST(Table1, BeatsBoundFlags) {
  const auto wang = compare_experiment(kExperiments[1]);
  EXPECT_NEAR(wang.eta, 1e-6, 1e-18);
  EXPECT_NEAR(wang.plob_absolute, plob_bound(1e-6), 1e-18);
  EXPECT_TRUE(wang.beats_absolute);
  const auto minder = compare_experiment(kExperiments[0]);
  EXPECT_NEAR(minder.eta, std::pow(10.0, -9.08), 1e-20);
  // At 0.2 dB/km every row but the 56 dB one clears the fiber-only bound.
  for (std::size_t i = 0; i < 6; ++i) EXPECT_TRUE(compare_experiment(kExperiments[i]).beats_absolute) << i;
  const auto last = compare_experiment(kExperiments[6]);
  EXPECT_FALSE(last.beats_absolute);
  EXPECT_LT(last.plob_device, last.plob_absolute);
}

TEST(Statistics, KolmogorovSurvival) {
  EXPECT_NEAR(kolmogorov_survival(1.3581), 0.05, 2e-4);
  EXPECT_NEAR(kolmogorov_survival(1.6276), 0.01, 1e-4);
  EXPECT_EQ(kolmogorov_survival(0.0), 1.0);
}

TEST(Statistics, KsTwoSample) {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> g(0, 1);
  std::vector<double> a(2000), b(2000), c(2000);
  for (auto& x : a) x = g(gen);
  for (auto& x : b) x = g(gen);
  for (auto& x : c) x = g(gen) + 0.3;
  EXPECT_GT(ks_two_sample(a, b).p_value, 0.01);
  EXPECT_LT(ks_two_sample(a, c).p_value, 1e-6);
  EXPECT_EQ(ks_two_sample(a, a).statistic, 0.0);
  EXPECT_THROW(ks_two_sample({}, a), DomainError);
}

TEST(Statistics, ChiSquared) {
  const auto same = chi_squared_homogeneity({100, 200, 300}, {100, 200, 300});
  EXPECT_EQ(same.statistic, 0.0);
  EXPECT_NEAR(same.p_value, 1.0, 1e-12);
  // 2x2 table with known statistic
  const auto r = chi_squared_homogeneity({30, 70}, {50, 50});
  EXPECT_NEAR(r.statistic, 8.3333333333, 1e-8);
  EXPECT_LT(r.p_value, 0.01);
  EXPECT_THROW(chi_squared_homogeneity({1}, {1, 2}), DomainError);
}

TEST(Curve, CsvHeaderAndRows) {
  const auto cfg = RunConfig::defaults();
  const auto pts = generate_rate_curve(cfg.channel, {0, 100, 300},
                                       {ProtocolVariant::tf_gllp, ProtocolVariant::pm, ProtocolVariant::pm_mdi},
                                       cfg.protocol);
  const auto csv = curve_to_csv(pts);
  std::istringstream in(csv);
  std::string header, row;
  std::getline(in, header);
  EXPECT_EQ(header,
            "distance_km,eta,plob,srb,tgw,tf_gllp,pm,pmmdi,npp_mc,sns_mc,opt_mu_tf_gllp,opt_mu_pm,opt_mu_pmmdi");
  std::getline(in, row);
  EXPECT_EQ(row.rfind("0.00000,1.00000,inf,inf,inf,", 0), 0u) << row;
  int rows = 1;
  while (std::getline(in, row)) ++rows;
  EXPECT_EQ(rows, 3);
  EXPECT_EQ(curve_to_csv({}), header + "\n");
}

TEST(Curve, ThreadsDoNotChangeResults) {
  const auto cfg = RunConfig::defaults();
  CurveOptions one, four;
  four.threads = 4;
  one.mc_pulses = four.mc_pulses = 20000;
  const std::vector<double> d{0, 50, 100, 150, 200};
  const std::vector<ProtocolVariant> v{ProtocolVariant::pm, ProtocolVariant::npp, ProtocolVariant::sns};
  EXPECT_EQ(curve_to_csv(generate_rate_curve(cfg.channel, d, v, cfg.protocol, one)),
            curve_to_csv(generate_rate_curve(cfg.channel, d, v, cfg.protocol, four)));
  EXPECT_THROW(generate_rate_curve(cfg.channel, {100, 50}, v, cfg.protocol), DomainError);
}

TEST(Curve, Log10Slope) {
  std::vector<double> x{300, 350, 400, 450, 500}, y;
  for (double L : x) y.push_back(3.0 * std::pow(10.0, -0.01 * L));
  EXPECT_NEAR(log10_slope(x, y), -0.01, 1e-12);
  EXPECT_THROW(log10_slope({1}, {1}), DomainError);
}

TEST(Report, HistogramAndJson) {
  const auto h = make_histogram({-1.0, -0.1, 0.0, 0.5, 0.99, 1.0, 7.0}, -1.0, 1.0, 4);
  EXPECT_EQ(h.counts, (std::vector<std::uint64_t>{1, 1, 1, 2}));
  TallyTable t(ProtocolVariant::pm, {0.1}, 16);
  TallyKey k;
  k.outcome = Outcome::d0_only;
  t.add(k, 3);
  const auto j = tallies_to_json(t);
  EXPECT_EQ(j["cells"].size(), 1u);
  EXPECT_EQ(j["cells"][0]["count"], 3);
  EXPECT_EQ(j["cells"][0]["outcome"], "d0_only");
}
