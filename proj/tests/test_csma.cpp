#include <gtest/gtest.h>

#include <cmath>

#include "hapr/csma.hpp"

using namespace hapr;

namespace {

// Independent reference: the uncancelled backoff expression, solved by plain
// bisection on tau - F(1 - (1 - tau)^(n-1)).
double reference_tau(double n, int w, int m) {
  auto f = [&](double tau) {
    const double p = 1.0 - std::pow(1.0 - tau, n - 1.0);
    const double a = 1.0 - 2.0 * p;
    if (std::abs(a) < 1e-9) {
      double s = 0.0;
      for (int i = 0; i < m; ++i) s += std::pow(2.0 * p, i);
      return 2.0 / ((w + 1.0) + p * w * s);
    }
    return 2.0 * a / (a * (w + 1.0) + p * w * (1.0 - std::pow(2.0 * p, m)));
  };
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid - f(mid) > 0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST(Contention, SingleStationClosedForm) {
  MacTimings t;
  t.w_min = 16;
  const auto cp = solve_contention(1, t);
  EXPECT_DOUBLE_EQ(cp.tau, 2.0 / 17.0);
  EXPECT_EQ(cp.p_coll, 0.0);
  EXPECT_EQ(cp.p_fail, 0.0);
  EXPECT_DOUBLE_EQ(cp.p_success, 2.0 / 17.0);
}

TEST(Contention, MatchesReferenceBisection) {
  MacTimings t;
  for (double n : {2.0, 3.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 7.5}) {
    const auto cp = solve_contention(n, t);
    EXPECT_NEAR(cp.tau, reference_tau(n, 32, 5), 1e-10) << n;
    EXPECT_LE(cp.residual, 1e-12);
  }
}

TEST(Contention, ProbabilitiesPartitionUnity) {
  MacTimings t;
  for (double n = 1.0; n <= 200.0; n += 3.7) {
    const auto cp = solve_contention(n, t);
    EXPECT_NEAR(cp.p_success + cp.p_idle + cp.p_fail, 1.0, 1e-12);
    EXPECT_GE(cp.p_fail, 0.0);
    EXPECT_GT(cp.utilization, 0.0);
    EXPECT_LT(cp.utilization, 1.0);
  }
}

TEST(Contention, SubunitCountClampedAndFlagged) {
  MacTimings t;
  const auto cp = solve_contention(0.4, t);
  EXPECT_TRUE(cp.clamped);
  EXPECT_EQ(cp.n_contenders, 1.0);
  EXPECT_DOUBLE_EQ(cp.tau, 2.0 / 33.0);
}

TEST(Contention, InvalidCount) {
  MacTimings t;
  for (double n : {0.0, -1.0, std::nan("")}) {
    try {
      solve_contention(n, t);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::invalid_count);
    }
  }
}

TEST(Contention, TransmitProbabilityFallsWithPopulation) {
  MacTimings t;
  double prev = 1.0;
  for (int n = 1; n <= 200; ++n) {
    const auto cp = solve_contention(n, t);
    EXPECT_LT(cp.tau, prev);
    prev = cp.tau;
  }
}

TEST(Contention, FiniteAtHalfCollisionProbability) {
  // The cancelled form has no singularity at p = 1/2.
  const double v = transmit_probability(0.5, 32, 5);
  EXPECT_DOUBLE_EQ(v, 2.0 / (33.0 + 16.0 * 5.0));
}

TEST(Contention, UtilizationFormula) {
  MacTimings t;
  const auto cp = solve_contention(10, t);
  const double manual = cp.p_success * t.t_s() / (cp.p_idle * t.slot_s + cp.p_success * t.t_s() + cp.p_fail * t.t_c());
  EXPECT_DOUBLE_EQ(utilization(cp, t), manual);
  EXPECT_DOUBLE_EQ(cp.utilization, manual);
}

TEST(Contention, NonPositiveTolerance) { EXPECT_THROW(solve_contention(3, MacTimings{}, 0.0), Error); }
