#include <gtest/gtest.h>

#include <cmath>

#include "hapr/phy.hpp"

using namespace hapr;

TEST(PathLoss, OneKilometreAtTwoGigahertz) {
  // 20 log10(4 pi 1000 2e9 / c)
  EXPECT_NEAR(path_loss_fspl(1000.0, 2e9), 98.4683, 1e-4);
}

TEST(PathLoss, SixDecibelsPerDoubling) {
  EXPECT_NEAR(path_loss_fspl(2000.0, 2e9) - path_loss_fspl(1000.0, 2e9), 20.0 * std::log10(2.0), 1e-12);
}

TEST(PathLoss, RejectsNonPositive) {
  EXPECT_THROW(path_loss_fspl(0.0, 2e9), Error);
  EXPECT_THROW(path_loss_fspl(10.0, -1.0), Error);
}

TEST(AfGain, KnownValues) {
  EXPECT_DOUBLE_EQ(af_gain(1.0, 1.0), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(af_gain(0.0, 5.0), 0.0);
  EXPECT_NEAR(af_gain(1e6, 1e6), 5e5, 1.0);
  EXPECT_THROW(af_gain(-1.0, 1.0), Error);
}

TEST(AfGain, BelowWeakerHop) {
  for (double a : {0.1, 1.0, 10.0, 1000.0})
    for (double b : {0.1, 1.0, 10.0, 1000.0}) EXPECT_LT(af_gain(a, b), std::min(a, b));
}

namespace {

SystemConfig loss_config() {
  SystemConfig c;
  c.n_users = 2;
  c.n_haps = 2;
  c.n_subchannels = 4;
  c.bandwidth_hz = 10e6;
  c.w1 = 0.4;
  c.w2 = 0.6;
  LinkBudget b{{150.0, 153.0}, Grid<double>(2, 2), {150.0, 160.0}};
  b.loss_gu_hap_db(0, 0) = 120.0;
  b.loss_gu_hap_db(0, 1) = 125.0;
  b.loss_gu_hap_db(1, 0) = 130.0;
  b.loss_gu_hap_db(1, 1) = 118.0;
  c.losses = b;
  return c;
}

}  // namespace

TEST(Rates, G2sRateByHand) {
  const auto c = loss_config();
  const double snr = 2.0 * std::pow(10.0, -15.0) / 1e-13;  // 150 dB loss
  EXPECT_NEAR(g2s_rate(0, c, *c.losses), 0.4 * 10e6 / 4.0 * std::log2(1.0 + snr), 1e-6);
}

TEST(Rates, GasRateByHand) {
  const auto c = loss_config();
  const double up = 0.2 * 1e-13 / 1e-13;    // 130 dB
  const double down = 10.0 * 1e-15 / 1e-13;  // 150 dB
  const double f = up * down / (up + down + 1.0);
  EXPECT_NEAR(gas_rate(1, 0, c, *c.losses), 0.6 * 10e6 * std::log2(1.0 + f), 1e-6);
}

TEST(Rates, IndexChecks) {
  const auto c = loss_config();
  EXPECT_THROW(g2s_rate(2, c, *c.losses), Error);
  EXPECT_THROW(gas_rate(0, 2, c, *c.losses), Error);
}

TEST(Rates, ZeroPowerGivesZeroRate) {
  auto c = loss_config();
  c.tx_power_g2s_w = 0.0;
  EXPECT_EQ(g2s_rate(0, c, *c.losses), 0.0);
}

TEST(Rates, TableMatchesPointFunctions) {
  const auto c = loss_config();
  const auto rt = build_rate_table(c);
  ASSERT_EQ(rt.n_users(), 2u);
  ASSERT_EQ(rt.n_haps(), 2u);
  for (std::size_t n = 0; n < 2; ++n) {
    EXPECT_EQ(rt.r_g2s[n], g2s_rate(n, c, *c.losses));
    for (std::size_t k = 0; k < 2; ++k) EXPECT_EQ(rt.r_gas(n, k), gas_rate(n, k, c, *c.losses));
  }
}

TEST(Rates, ShapeMismatch) {
  auto c = loss_config();
  c.n_users = 3;
  EXPECT_THROW(build_rate_table(c), Error);
}

TEST(Geometry, LossesOverrideGeometry) {
  auto c = loss_config();
  c.geometry = make_disc_geometry(2, 2, DiscLayout{});
  EXPECT_EQ(build_link_budget(c).loss_g2s_db, c.losses->loss_g2s_db);
}

TEST(Geometry, BudgetFromPositions) {
  Geometry g;
  g.user_positions = {{0, 0, 0}};
  g.hap_positions = {{0, 0, 20e3}};
  g.satellite_position = {0, 0, 780e3};
  const auto b = link_budget_from_geometry(g);
  EXPECT_NEAR(b.loss_g2s_db[0], path_loss_fspl(780e3, 2e9), 1e-12);
  EXPECT_NEAR(b.loss_gu_hap_db(0, 0), path_loss_fspl(20e3, 2e9), 1e-12);
  EXPECT_NEAR(b.loss_hap_sat_db[0], path_loss_fspl(760e3, 2e9), 1e-12);
}

TEST(Geometry, DiscLayoutIsPrefixStable) {
  DiscLayout l;
  const auto a = make_disc_geometry(10, 2, l);
  const auto b = make_disc_geometry(25, 2, l);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(a.user_positions[i], b.user_positions[i]);
  for (const auto& p : b.user_positions) EXPECT_LE(std::hypot(p.x, p.y), l.disc_radius_m);
  ASSERT_EQ(b.hap_positions.size(), 2u);
  EXPECT_NEAR(std::hypot(b.hap_positions[0].x, b.hap_positions[0].y), l.hap_ring_radius_m, 1e-9);
}
