#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "tfqkd/bounds.hpp"
#include "tfqkd/core.hpp"

using namespace tfqkd;

namespace {

// Independent forms used as oracles.
double entropy_nats(double x) { return -(x * std::log(x) + (1 - x) * std::log(1 - x)) / std::log(2.0); }
double plob_direct(double eta) { return -std::log(1 - eta) / std::log(2.0); }

}  // namespace

TEST(BinaryEntropy, KnownValues) {
  EXPECT_DOUBLE_EQ(binary_entropy(0.5), 1.0);
  EXPECT_EQ(binary_entropy(0.0), 0.0);
  EXPECT_EQ(binary_entropy(1.0), 0.0);
  EXPECT_NEAR(binary_entropy(0.11), 0.499916, 1e-6);
  for (double x : {1e-9, 0.01, 0.2, 0.37, 0.9}) EXPECT_NEAR(binary_entropy(x), entropy_nats(x), 1e-13) << x;
}

TEST(BinaryEntropy, SymmetricAndOutOfRangeThrows) {
  for (double x : {0.01, 0.1, 0.3}) EXPECT_NEAR(binary_entropy(x), binary_entropy(1 - x), 1e-14);
  EXPECT_THROW(binary_entropy(-1e-12), DomainError);
  EXPECT_THROW(binary_entropy(1.0 + 1e-12), DomainError);
  EXPECT_THROW(binary_entropy(std::nan("")), DomainError);
}

TEST(Channel, TransmittanceFromLoss) {
  EXPECT_DOUBLE_EQ(channel_transmittance(0, 0.2), 1.0);
  EXPECT_NEAR(channel_transmittance(100, 0.2), 0.01, 1e-15);
  EXPECT_NEAR(channel_transmittance(50, 0.2), 0.1, 1e-15);
  EXPECT_NEAR(attenuation_transmittance(30), 1e-3, 1e-18);
  EXPECT_THROW(channel_transmittance(-1, 0.2), DomainError);
  EXPECT_THROW(channel_transmittance(1, -0.2), DomainError);
}

TEST(Channel, ArmsSplitTheLoss) {
  ChannelParams c;
  c.length_km = 100;
  c.detector_efficiency = 0.4;
  EXPECT_NEAR(c.alice_arm(), 0.1 * 0.4, 1e-15);
  EXPECT_NEAR(c.bob_arm(), c.alice_arm(), 1e-15);
  c.asymmetry_db = 10;
  EXPECT_NEAR(c.bob_arm(), 0.004, 1e-15);
  EXPECT_NEAR(c.fiber_arm() * c.fiber_arm(), c.eta(), 1e-15);
}

TEST(Channel, ValidateRejectsBadParameters) {
  ChannelParams c;
  c.detector_efficiency = 1.5;
  EXPECT_THROW(c.validate(), DomainError);
  c = {};
  c.dark_count_prob = 1.5;
  EXPECT_THROW(c.validate(), DomainError);
  c = {};
  c.misalignment = -0.1;
  EXPECT_THROW(c.validate(), DomainError);
  c = {};
  c.length_km = -3;
  EXPECT_THROW(c.validate(), DomainError);
}

TEST(Phase, ReducedToOneTurn) {
  EXPECT_NEAR(Phase(-0.5).radians(), kTwoPi - 0.5, 1e-15);
  EXPECT_NEAR(Phase(7 * std::numbers::pi).radians(), std::numbers::pi, 1e-12);
  EXPECT_EQ(Phase(kTwoPi).radians(), 0.0);
  EXPECT_NEAR((Phase(6.0) + Phase(1.0)).radians(), 7.0 - kTwoPi, 1e-14);
  for (double x : {-100.0, -1e-17, 0.0, 3.0, 1e6}) {
    const double r = Phase(x).radians();
    EXPECT_GE(r, 0.0);
    EXPECT_LT(r, kTwoPi);
  }
}

TEST(Slices, IndexFromPhase) {
  EXPECT_EQ(slice_of_phase(0.0, 16).index, 0);
  EXPECT_EQ(slice_of_phase(kTwoPi / 16 - 1e-12, 16).index, 0);
  EXPECT_EQ(slice_of_phase(kTwoPi / 16 + 1e-12, 16).index, 1);
  EXPECT_EQ(slice_of_phase(std::numbers::pi + 0.01, 16).index, 8);
  EXPECT_EQ(slice_of_phase(-1e-9, 16).index, 15);
  EXPECT_EQ(slice_of_phase(0.0, 16).slice_count, 16);
}

TEST(Slices, InvalidCountsThrow) {
  EXPECT_THROW(slice_of_phase(0.0, 0), DomainError);
  EXPECT_THROW(slice_of_phase(0.0, 1), DomainError);
  EXPECT_THROW(slice_of_phase(0.0, 15), DomainError);
  EXPECT_NO_THROW(slice_of_phase(0.0, 2));
}

TEST(Slices, UniformPhasesFillSlicesUniformly) {
  constexpr int kM = 16;
  constexpr int kN = 1000000;
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  std::vector<double> counts(kM, 0.0);
  for (int i = 0; i < kN; ++i) counts[slice_of_phase(u(gen), kM).index] += 1;
  double chi2 = 0;
  const double expect = static_cast<double>(kN) / kM;
  for (double c : counts) chi2 += (c - expect) * (c - expect) / expect;
  // chi-squared with 15 dof: P(chi2 > 37.7) = 0.001
  EXPECT_LT(chi2, 37.7);
}

TEST(Bounds, ExactValues) {
  EXPECT_NEAR(plob_bound(0.5), 1.0, 1e-12);
  EXPECT_NEAR(plob_bound(0.75), 2.0, 1e-12);
  EXPECT_NEAR(srb_bound(0.25), 1.0, 1e-12);
  EXPECT_NEAR(tgw_bound(1.0 / 3.0), 1.0, 1e-12);
  EXPECT_NEAR(tgw_bound(0.6), 2.0, 1e-12);
}

TEST(Bounds, SmallEtaLimit) {
  EXPECT_NEAR(plob_bound(1e-6) / 1e-6, 1.0 / std::log(2.0), 1e-6);
  EXPECT_NEAR(plob_bound(1e-12), plob_direct(1e-12), 1e-20 + 1e-3 * plob_bound(1e-12));
  EXPECT_NEAR(tgw_bound(1e-6) / plob_bound(1e-6), 2.0, 1e-5);
  EXPECT_NEAR(srb_bound(1e-6) / plob_bound(1e-3), 1.0, 1e-3);
}

TEST(Bounds, OrderingOnGrid) {
  for (double eta = 1e-10; eta < 0.99; eta *= 1.7) {
    EXPECT_LE(rci_lower_bound(eta), plob_bound(eta) * (1 + 1e-12)) << eta;
    EXPECT_LE(plob_bound(eta), tgw_bound(eta)) << eta;
    EXPECT_LE(plob_bound(eta), srb_bound(eta)) << eta;
  }
}

TEST(Bounds, DomainAndSentinels) {
  for (double bad : {0.0, 1.0, -0.1, 1.1}) {
    EXPECT_THROW(plob_bound(bad), DomainError);
    EXPECT_THROW(srb_bound(bad), DomainError);
    EXPECT_THROW(tgw_bound(bad), DomainError);
  }
  for (auto kind : {BoundKind::plob, BoundKind::srb, BoundKind::tgw}) {
    EXPECT_EQ(bound_or_sentinel(kind, 0.0), 0.0);
    EXPECT_EQ(bound_or_sentinel(kind, 1.0), std::numeric_limits<double>::infinity());
    EXPECT_THROW(bound_or_sentinel(kind, 1.5), DomainError);
  }
}

TEST(Bounds, AbsoluteReferenceIncludesDetector) {
  ChannelParams c;
  c.length_km = 100;
  c.detector_efficiency = 0.4;
  EXPECT_NEAR(absolute_plob(c, BoundReference::fiber_only), plob_bound(0.01), 1e-15);
  EXPECT_NEAR(absolute_plob(c, BoundReference::device_included), plob_bound(0.004), 1e-15);
}
