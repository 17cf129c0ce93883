#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "tfqkd/estimation.hpp"

using namespace tfqkd;

namespace {

TallyKey pm_key(SliceRelation rel, Outcome o, bool bits_equal, std::uint8_t ia = 0, std::uint8_t ib = 0) {
  TallyKey k;
  k.intensity_a = ia;
  k.intensity_b = ib;
  k.relation = rel;
  k.outcome = o;
  k.bits_equal = bits_equal;
  return k;
}

}  // namespace

TEST(Binomial, RatioAndStandardError) {
  const auto e = binomial_estimate(100, 1000000);
  EXPECT_DOUBLE_EQ(e.value, 1e-4);
  EXPECT_NEAR(e.std_error, std::sqrt(1e-4 * (1 - 1e-4) / 1e6), 1e-18);
  EXPECT_EQ(e.successes, 100u);
  EXPECT_EQ(e.trials, 1000000u);
}

TEST(Binomial, OneSidedErrorAtBoundary) {
  const auto zero = binomial_estimate(0, 50);
  EXPECT_EQ(zero.value, 0.0);
  // one-sided 68.27% upper limit solves (1-p)^n = 0.3173
  EXPECT_NEAR(std::pow(1 - zero.std_error, 50), 1 - 0.682689492137, 1e-12);
  const auto all = binomial_estimate(50, 50);
  EXPECT_EQ(all.value, 1.0);
  EXPECT_EQ(all.std_error, zero.std_error);
  EXPECT_THROW(binomial_estimate(0, 0), DomainError);
}

TEST(TalliesToStats, PlantedPmTable) {
  // Key group (signal, signal): 1000 pairs, 100 effective, 7 errors.
  // A same-slice d0 with equal bits is correct; opposite slice flips it.
  TallyTable t(ProtocolVariant::pm, {0.1, 0.02}, 16);
  t.add(pm_key(SliceRelation::same, Outcome::no_click, true), 600);
  t.add(pm_key(SliceRelation::opposite, Outcome::no_click, false), 300);
  t.add(pm_key(SliceRelation::same, Outcome::d0_only, true), 50);
  t.add(pm_key(SliceRelation::same, Outcome::d1_only, false), 20);
  t.add(pm_key(SliceRelation::opposite, Outcome::d1_only, true), 23);
  t.add(pm_key(SliceRelation::same, Outcome::d1_only, true), 4);
  t.add(pm_key(SliceRelation::opposite, Outcome::d0_only, true), 3);
  t.add(pm_key(SliceRelation::same, Outcome::double_click, true), 5);
  t.add(pm_key(SliceRelation::other, Outcome::d0_only, true), 999);  // not sifted
  // conjugate group (decoy, decoy)
  t.add(pm_key(SliceRelation::same, Outcome::no_click, true, 1, 1), 190);
  t.add(pm_key(SliceRelation::same, Outcome::d0_only, true, 1, 1), 9);
  t.add(pm_key(SliceRelation::same, Outcome::d1_only, true, 1, 1), 1);

  const auto s = tallies_to_stats(t);
  EXPECT_EQ(s.pulses, t.total());
  EXPECT_EQ(s.gain.successes, 100u);
  EXPECT_EQ(s.gain.trials, 1005u);
  EXPECT_EQ(s.qber_z.successes, 7u);
  EXPECT_DOUBLE_EQ(s.qber_z.value, 0.07);
  ASSERT_TRUE(s.phase_error);
  EXPECT_DOUBLE_EQ(s.phase_error->value, 0.1);
  EXPECT_DOUBLE_EQ(s.test_gain->value, 10.0 / 200.0);
}

TEST(TalliesToStats, RecoversMultinomialDraw) {
  // Draw a key group with known gain and error probability and check the
  // estimates land within 4 sigma.
  std::mt19937_64 gen(21);
  std::discrete_distribution<int> pick({0.97, 0.028, 0.002});
  TallyTable t(ProtocolVariant::npp, {0.1}, 16);
  constexpr int kN = 500000;
  for (int i = 0; i < kN; ++i) {
    TallyKey k;
    k.relation = SliceRelation::same;
    k.bits_equal = true;
    k.outcome = std::array{Outcome::no_click, Outcome::d0_only, Outcome::d1_only}[pick(gen)];
    t.add(k);
  }
  const auto s = tallies_to_stats(t);
  EXPECT_NEAR(s.gain.value, 0.03, 4 * s.gain.std_error);
  EXPECT_NEAR(s.qber_z.value, 0.002 / 0.03, 4 * s.qber_z.std_error);
  EXPECT_FALSE(s.phase_error);
}

TEST(TalliesToStats, EmptyGroupNamesTheGroup) {
  TallyTable t(ProtocolVariant::pm, {0.1}, 16);
  try {
    tallies_to_stats(t);
    FAIL() << "expected EmptyGroupError";
  } catch (const EmptyGroupError& e) {
    EXPECT_NE(e.group().find("signal/signal"), std::string::npos);
  }
  t.add(pm_key(SliceRelation::same, Outcome::no_click, true), 10);
  try {
    tallies_to_stats(t);
    FAIL() << "expected EmptyGroupError";
  } catch (const EmptyGroupError& e) {
    EXPECT_NE(std::string(e.what()).find("effective"), std::string::npos);
  }
}

TEST(TalliesToStats, SnsUsesSendingBasis) {
  TallyTable t(ProtocolVariant::sns, {0.1, 0.1}, 16);
  TallyKey k;
  k.relation = SliceRelation::same;
  k.intensity_a = 0;
  k.intensity_b = kNoPulse;
  k.outcome = Outcome::d1_only;
  k.bits_equal = true;
  t.add(k, 40);
  k.intensity_a = 0;
  k.intensity_b = 0;
  k.bits_equal = false;
  t.add(k, 10);
  const auto s = tallies_to_stats(t);
  EXPECT_DOUBLE_EQ(s.qber_z.value, 0.2);
}

TEST(McRate, NeedsPhaseErrorGroup) {
  TallyTable t(ProtocolVariant::pm, {0.1}, 16);
  t.add(pm_key(SliceRelation::same, Outcome::d0_only, true), 10);
  const auto s = tallies_to_stats(t);
  EXPECT_THROW(mc_rate(s, ProtocolConfig{}), EmptyGroupError);
}
