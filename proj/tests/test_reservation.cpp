#include <gtest/gtest.h>

#include <cmath>

#include "hapr/reservation.hpp"

using namespace hapr;

namespace {

SystemConfig with_q(double q) {
  SystemConfig c;
  c.service_rate = q;
  c.arrival_rate = 1.0 - q;
  if (q == 1.0) c.arrival_rate = 1e-300;
  return c;
}

// Saturated transmit probability plus the mean idle gap after each success:
// 1/eps = 1/tau_sat(varrho) + (1 - varrho)(1 - q)/q. Solved by bisection.
double reference_epsilon(double contenders, double q, int w, int m) {
  auto f = [&](double eps) {
    const double r = contenders > 1 ? 1.0 - std::pow(1.0 - eps, contenders - 1.0) : 0.0;
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += std::pow(2.0 * r, i);
    const double tau_sat = 2.0 / ((w + 1.0) + r * w * s);
    return 1.0 / (1.0 / tau_sat + (1.0 - r) * (1.0 - q) / q);
  };
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid - f(mid) > 0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST(Reservation, DefaultQ) {
  SystemConfig c;
  EXPECT_DOUBLE_EQ(c.q(), 0.1);
}

TEST(Reservation, SingleContenderClosedForm) {
  MacTimings t;
  const auto c = with_q(0.25);
  const auto rp = solve_reservation(4.0, c, t);
  EXPECT_DOUBLE_EQ(rp.varrho, 0.0);
  const double expect = 2.0 * 0.25 / (0.25 * 33.0 + 2.0 * 0.75);
  EXPECT_NEAR(rp.epsilon, expect, 1e-15);
  EXPECT_NEAR(rp.zeta_s, expect, 1e-15);
}

TEST(Reservation, SaturatedLimitMatchesContention) {
  // q = 1 removes the idle gap, leaving the saturated fixed point.
  MacTimings t;
  SystemConfig c;
  c.arrival_rate = 1e-12;
  c.service_rate = 1.0;
  const auto rp = solve_reservation(10.0, c, t);
  const auto cp = solve_contention(10.0 * c.q(), t);
  EXPECT_NEAR(rp.epsilon, cp.tau, 1e-9);
}

TEST(Reservation, MatchesReference) {
  MacTimings t;
  for (double q : {0.1, 0.3, 0.7}) {
    const auto c = with_q(q);
    for (double n : {20.0, 50.0, 100.0, 333.0}) {
      const auto rp = solve_reservation(n, c, t);
      EXPECT_NEAR(rp.epsilon, reference_epsilon(n * q, q, 32, 5), 1e-10) << q << " " << n;
      EXPECT_LE(rp.residual, 1e-12);
    }
  }
}

TEST(Reservation, CapacityDerivation) {
  MacTimings t;
  SystemConfig c;
  const auto rp = solve_reservation(100.0, c, t);
  EXPECT_NEAR(rp.n_reserved, t.negotiation_s * rp.zeta_s / t.t_s_neg(), 1e-12);
  EXPECT_NEAR(rp.step, t.reserved_s() / (rp.n_reserved * t.payload_s), 1e-9);
  EXPECT_NEAR(rp.beta, t.reserved_s() * t.t_s_neg() / (t.frame_s * t.negotiation_s * rp.zeta_s), 1e-12);
  // N_s r t_p fills the reserved period exactly.
  EXPECT_NEAR(rp.n_reserved * rp.step * t.payload_s, t.reserved_s(), 1e-12);
  EXPECT_EQ(rp.exceeds_haps, rp.n_reserved > 2.0);
}

TEST(Reservation, SubunitPopulation) {
  MacTimings t;
  SystemConfig c;  // q = 0.1
  try {
    solve_reservation(5.0, c, t);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::subunit_population);
  }
}

TEST(Reservation, EmptyCapacity) {
  ReservationPoint rp;
  const auto cap = reservation_capacity(rp, MacTimings{});
  EXPECT_TRUE(cap.empty());
  EXPECT_EQ(rp.whole_reservations(), 0u);
}

TEST(Reservation, SuccessProbabilityRisesThenFalls) {
  MacTimings t;
  SystemConfig c;
  double prev = 0.0;
  for (double n = 10.0; n <= 200.0; n += 10.0) {
    const auto rp = solve_reservation(n, c, t);
    EXPECT_GT(rp.zeta_s, prev);
    prev = rp.zeta_s;
  }
  EXPECT_LT(solve_reservation(5000.0, c, t).zeta_s, solve_reservation(1000.0, c, t).zeta_s);
}
