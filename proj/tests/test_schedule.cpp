#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "hapr/schedule.hpp"

using namespace hapr;

namespace {

ReservationPoint reservation_for(double n_gas, double q, const MacTimings& t) {
  SystemConfig c;
  c.service_rate = q;
  c.arrival_rate = 1.0 - q + 1e-9;
  return solve_reservation(n_gas, c, t);
}

}  // namespace

TEST(Schedule, AllG2sGivesEmptyTable) {
  MacTimings t;
  auto d = uniform_decision(6, 2, 0.0);
  d.assignment(0, 0) = 1;
  const auto fs = execute_schedule(d, reservation_for(6.0, 0.5, t), t, 1);
  EXPECT_TRUE(fs.reservations.empty());
  for (const auto& u : fs.users) EXPECT_EQ(u.mode, LinkMode::g2s);
}

TEST(Schedule, SingleReservedUserGetsWholeStep) {
  MacTimings t;
  auto d = uniform_decision(1, 1, 1.0);
  d.assignment(0, 0) = 1;
  ReservationPoint rp;
  rp.n_gas = 1.0;
  rp.zeta_s = 0.05;
  rp.n_reserved = 1.0;
  rp.step = t.reserved_s() / t.payload_s;
  rp.beta = t.payload_s * rp.step / t.frame_s;
  const auto fs = execute_schedule(d, rp, t, 7);
  ASSERT_EQ(fs.reservations.size(), 1u);
  const auto& r = fs.reservations[0];
  EXPECT_EQ(r.first_slot, 0u);
  EXPECT_EQ(r.slot_count, static_cast<std::size_t>(std::floor(fs.step)));
  EXPECT_EQ(fs.users[0].hap, 0u);
  EXPECT_NEAR(fs.reserved_payload_s(), t.reserved_s(), t.payload_s);
}

TEST(Schedule, DeterministicAndSlotCountsAddUp) {
  MacTimings t;
  Decision d = uniform_decision(10, 3, 0.0);
  const std::vector<double> rho{0.9, 0.1, 0.5, 1.0, 0.7, 0.3, 0.8, 0.6, 0.95, 0.2};
  d.rho = rho;
  d.assignment(0, 0) = d.assignment(3, 1) = d.assignment(4, 2) = d.assignment(8, 0) = 1;
  const auto rp = reservation_for(6.05, 0.5, t);
  const auto a = execute_schedule(d, rp, t, 2024);
  const auto b = execute_schedule(d, rp, t, 2024);
  ASSERT_EQ(a.reservations.size(), b.reservations.size());
  for (std::size_t i = 0; i < a.reservations.size(); ++i) {
    EXPECT_EQ(a.reservations[i].user, b.reservations[i].user);
    EXPECT_EQ(a.reservations[i].slot_count, b.reservations[i].slot_count);
  }

  // Brute-force occupancy count over every payload slot of the frame.
  const auto total_slots = static_cast<std::size_t>(std::llround(t.reserved_s() / t.payload_s));
  std::vector<int> owner(total_slots, 0);
  for (const auto& r : a.reservations)
    for (std::size_t j = r.first_slot; j < r.first_slot + r.slot_count; ++j) {
      ASSERT_LT(j, total_slots);
      ++owner[j];
    }
  std::size_t used = 0;
  for (int o : owner) {
    EXPECT_LE(o, 1);
    used += static_cast<std::size_t>(o);
  }
  EXPECT_EQ(used, static_cast<std::size_t>(std::floor(static_cast<double>(a.reservations.size()) * a.step)));
  EXPECT_NEAR(a.reserved_payload_s(), static_cast<double>(used) * t.payload_s, 1e-15);
}

TEST(Schedule, OversubscriptionTruncatesAndFlags) {
  MacTimings t;
  Decision d = uniform_decision(6, 6, 1.0);
  for (std::size_t n = 0; n < 6; ++n) d.assignment(n, n) = 1;
  ReservationPoint rp = reservation_for(6.0, 0.5, t);
  rp.n_reserved = 2.5;
  const auto fs = execute_schedule(d, rp, t, 3);
  EXPECT_TRUE(fs.oversubscribed);
  EXPECT_EQ(fs.reservations.size(), 2u);
  std::size_t losers = 0;
  for (const auto& u : fs.users) losers += u.gas_unreserved;
  EXPECT_EQ(losers, 4u);
}

TEST(Schedule, GasWithoutHapIsUnreserved) {
  MacTimings t;
  auto d = uniform_decision(3, 1, 1.0);
  const auto fs = execute_schedule(d, reservation_for(3.0, 0.5, t), t, 5);
  for (const auto& u : fs.users) {
    EXPECT_EQ(u.mode, LinkMode::gas);
    EXPECT_TRUE(u.gas_unreserved);
  }
}

TEST(Schedule, HandshakesFitInNegotiationPeriod) {
  MacTimings t;
  Decision d = uniform_decision(8, 8, 1.0);
  for (std::size_t n = 0; n < 8; ++n) d.assignment(n, n) = 1;
  const auto rp = reservation_for(8.0, 1.0 - 1e-9, t);
  const auto fs = execute_schedule(d, rp, t, 11);
  for (const auto& r : fs.reservations) EXPECT_LE(r.handshake_end_s, t.negotiation_s + 1e-15);
}
