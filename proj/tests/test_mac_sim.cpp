#include <gtest/gtest.h>

#include <cmath>

#include "hapr/csma.hpp"
#include "hapr/mac_sim.hpp"
#include "hapr/reservation.hpp"

using namespace hapr;

TEST(SimCsma, SingleStation) {
  MacTimings t;
  const auto s = simulate_csma(1, t, 200000, 1);
  EXPECT_EQ(s.collisions, 0u);
  EXPECT_EQ(s.est_pc.value, 0.0);
  EXPECT_GT(s.est_pc.se, 0.0);
  EXPECT_LE(std::abs(s.est_tau.value - 2.0 / 33.0), 3.0 * s.est_tau.se);
}

TEST(SimCsma, SlotTypesPartition) {
  MacTimings t;
  for (std::size_t n : {1u, 3u, 17u}) {
    const auto s = simulate_csma(n, t, 50000, n);
    EXPECT_EQ(s.successes + s.collisions + s.idles, s.slots_simulated);
    for (const auto* e : {&s.est_tau, &s.est_ps, &s.est_pe, &s.est_pc, &s.est_util}) {
      EXPECT_GE(e->value, 0.0);
      EXPECT_LE(e->value, 1.0);
      EXPECT_GT(e->se, 0.0);
    }
  }
}

TEST(SimCsma, SameSeedIdentical) {
  MacTimings t;
  const auto a = simulate_csma(7, t, 30000, 99);
  const auto b = simulate_csma(7, t, 30000, 99);
  EXPECT_EQ(a.successes, b.successes);
  EXPECT_EQ(a.collisions, b.collisions);
  EXPECT_EQ(a.tx_attempts, b.tx_attempts);
  EXPECT_EQ(a.est_util.value, b.est_util.value);
  EXPECT_EQ(a.est_util.se, b.est_util.se);
  const auto c = simulate_csma(7, t, 30000, 100);
  EXPECT_NE(a.tx_attempts, c.tx_attempts);
}

TEST(SimCsma, AgreesWithFixedPoint) {
  MacTimings t;
  const auto s = simulate_csma(10, t, 1000000, 12345);
  const auto cp = solve_contention(10, t);
  EXPECT_LE(std::abs(s.est_tau.value - cp.tau), 3.0 * s.est_tau.se);
  EXPECT_LE(std::abs(s.est_ps.value - cp.p_success), 3.0 * s.est_ps.se);
  EXPECT_LE(std::abs(s.est_pe.value - cp.p_idle), 3.0 * s.est_pe.se);
  EXPECT_LE(std::abs(s.est_pc.value - cp.p_fail), 3.0 * s.est_pc.se);
  EXPECT_LE(std::abs(s.est_util.value - cp.utilization), 3.0 * s.est_util.se);
}

TEST(SimCsma, ErrorShrinksWithSlots) {
  MacTimings t;
  const auto small = simulate_csma(5, t, 20000, 4);
  const auto large = simulate_csma(5, t, 2000000, 4);
  const double ratio = small.est_ps.se / large.est_ps.se;  // ideal 10
  EXPECT_GT(ratio, 5.0);
  EXPECT_LT(ratio, 20.0);
}

TEST(SimCsma, Preconditions) {
  EXPECT_THROW(simulate_csma(0, MacTimings{}, 20000, 1), Error);
  EXPECT_THROW(simulate_csma(2, MacTimings{}, 100, 1), Error);
}

TEST(SimNegotiation, SingleAlwaysActiveUser) {
  MacTimings t;
  const auto s = simulate_negotiation(1, 1.0, t, 2000, 5);
  const double eps = 2.0 / 33.0;
  EXPECT_LE(std::abs(s.zeta_s.value - eps), 3.0 * s.zeta_s.se);
}

TEST(SimNegotiation, AgreesWithFixedPoint) {
  MacTimings t;
  SystemConfig c;  // q = 0.1
  const auto s = simulate_negotiation(50, 0.1, t, 10000, 77);
  const auto rp = solve_reservation(50.0, c, t);
  EXPECT_EQ(s.contenders, 5u);
  EXPECT_LE(std::abs(s.zeta_s.value - rp.zeta_s), 3.0 * s.zeta_s.se);
}

TEST(SimNegotiation, SingleContenderIdleGap) {
  // One contender with q < 1 checks the idle-gap term of the closed form.
  MacTimings t;
  const double q = 0.25;
  const auto s = simulate_negotiation(4, q, t, 20000, 8);
  const double eps = 2.0 * q / (q * 33.0 + 2.0 * (1.0 - q));
  EXPECT_LE(std::abs(s.zeta_s.value - eps), 3.0 * s.zeta_s.se);
}

TEST(SimNegotiation, NoActivity) {
  const auto s = simulate_negotiation(30, 0.0, MacTimings{}, 100, 1);
  EXPECT_EQ(s.successes, 0u);
  EXPECT_EQ(s.zeta_s.value, 0.0);
  EXPECT_EQ(s.idles, s.slots);
}

TEST(SimNegotiation, Deterministic) {
  const auto a = simulate_negotiation(20, 0.3, MacTimings{}, 300, 4);
  const auto b = simulate_negotiation(20, 0.3, MacTimings{}, 300, 4);
  EXPECT_EQ(a.successes, b.successes);
  EXPECT_EQ(a.slots, b.slots);
  EXPECT_EQ(a.zeta_s.se, b.zeta_s.se);
}
