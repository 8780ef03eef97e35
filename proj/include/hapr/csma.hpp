#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "hapr/error.hpp"
#include "hapr/model.hpp"

namespace hapr {

/// Solved saturated CSMA/CA operating point for one sub-channel.
struct ContentionPoint {
  double n_requested = 0.0;   // contender count as asked for (may be < 1)
  double n_contenders = 0.0;  // count actually used, max(n_requested, 1)
  bool clamped = false;
  double tau = 0.0;        // per-slot transmit probability
  double p_coll = 0.0;     // conditional collision probability
  double p_success = 0.0;  // exactly one station transmits
  double p_idle = 0.0;
  double p_fail = 0.0;
  double utilization = 0.0;  // fraction of channel time carrying successful payload exchanges
  double residual = 0.0;     // |tau - F(p(tau))|
  int iterations = 0;
};

/// sum_{i<stages} x^i, i.e. (1 - x^stages) / (1 - x) without the 0/0 at x = 1.
inline double backoff_series(double x, std::uint32_t stages) {
  double sum = 0.0;
  double term = 1.0;
  for (std::uint32_t i = 0; i < stages; ++i) {
    sum += term;
    term *= x;
  }
  return sum;
}

/// Per-slot transmit probability of a saturated binary-exponential-backoff
/// station given collision probability p:
///   2(1-2p) / ((1-2p)(W+1) + pW(1-(2p)^l)),
/// evaluated after cancelling (1-2p) so it stays finite at p = 1/2.
inline double transmit_probability(double p, std::uint32_t w, std::uint32_t stages) {
  const double wd = static_cast<double>(w);
  return 2.0 / ((wd + 1.0) + p * wd * backoff_series(2.0 * p, stages));
}

/// Collision probability seen by one of n contenders when each transmits with tau.
inline double collision_probability(double tau, double n) {
  if (n <= 1.0) return 0.0;
  return -std::expm1((n - 1.0) * std::log1p(-tau));
}

namespace detail {

struct FixedPoint {
  double x;
  double residual;
  int iterations;
};

/// Root of x - g(x) on (lo, hi) for increasing x - g(x).
template <typename G>
FixedPoint bisect_fixed_point(G&& g, double lo, double hi) {
  int it = 0;
  for (; it < 200 && hi - lo > 1e-17; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid - g(mid) > 0.0)
      hi = mid;
    else
      lo = mid;
  }
  const double lo_res = std::abs(lo - g(lo));
  const double hi_res = std::abs(hi - g(hi));
  return lo_res <= hi_res ? FixedPoint{lo, lo_res, it} : FixedPoint{hi, hi_res, it};
}

/// Damped iteration x <- x + 0.5 (g(x) - x). iterations < 0 in the result means the
/// residual stopped shrinking (oscillation) or the budget ran out.
template <typename G>
FixedPoint damped_fixed_point(G&& g, double x0, double tol, int max_iter = 2000) {
  double x = x0;
  double prev = std::numeric_limits<double>::infinity();
  int growth = 0;
  for (int it = 0; it < max_iter; ++it) {
    const double r = g(x) - x;
    if (std::abs(r) <= tol) return {x, std::abs(r), it};
    growth = std::abs(r) >= prev ? growth + 1 : 0;
    if (growth >= 3) return {x, std::abs(r), -1};
    prev = std::abs(r);
    x += 0.5 * r;
  }
  return {x, std::abs(g(x) - x), -1};
}

}  // namespace detail

/// Solves the coupled transmit/collision probabilities for n contenders and
/// fills the per-slot success, idle and failure probabilities and utilization.
/// Real-valued n is supported; 0 < n < 1 is clamped to 1 and flagged.
inline ContentionPoint solve_contention(double n, const MacTimings& t, double tol = 1e-12) {
  if (!(n > 0.0) || !std::isfinite(n))
    throw Error(ErrorCode::invalid_count, "n_contenders", "need at least one contender, got " + std::to_string(n));
  if (!(tol > 0.0)) throw Error(ErrorCode::invalid_value, "tol", "tolerance must be > 0");

  ContentionPoint cp;
  cp.n_requested = n;
  cp.clamped = n < 1.0;
  cp.n_contenders = std::max(n, 1.0);
  const double nc = cp.n_contenders;

  auto g = [&](double tau) { return transmit_probability(collision_probability(tau, nc), t.w_min, t.backoff_stages); };

  if (nc == 1.0) {
    cp.tau = transmit_probability(0.0, t.w_min, t.backoff_stages);
    cp.residual = 0.0;
  } else {
    auto fp = detail::damped_fixed_point(g, transmit_probability(0.0, t.w_min, t.backoff_stages), tol);
    if (fp.iterations < 0) fp = detail::bisect_fixed_point(g, 1e-9, 1.0 - 1e-9);
    if (!(fp.residual <= tol))
      throw Error(ErrorCode::no_convergence, "tau", "fixed-point residual " + std::to_string(fp.residual) + " above tolerance");
    cp.tau = fp.x;
    cp.residual = fp.residual;
    cp.iterations = fp.iterations;
  }

  cp.p_coll = collision_probability(cp.tau, nc);
  const double idle_others = std::exp((nc - 1.0) * std::log1p(-cp.tau));
  cp.p_success = nc * cp.tau * idle_others;
  cp.p_idle = idle_others * (1.0 - cp.tau);
  cp.p_fail = std::max(0.0, 1.0 - cp.p_success - cp.p_idle);

  const double den = cp.p_idle * t.slot_s + cp.p_success * t.t_s() + cp.p_fail * t.t_c();
  cp.utilization = cp.p_success * t.t_s() / den;
  return cp;
}

/// Fraction of channel time spent in successful exchanges:
/// p_s t_s / (p_e slot + p_s t_s + p_c t_c).
inline double utilization(const ContentionPoint& cp, const MacTimings& t) {
  const double den = cp.p_idle * t.slot_s + cp.p_success * t.t_s() + cp.p_fail * t.t_c();
  if (!(den > 0.0)) throw Error(ErrorCode::invalid_value, "contention_point", "degenerate denominator");
  return cp.p_success * t.t_s() / den;
}

}  // namespace hapr
