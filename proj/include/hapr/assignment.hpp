#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "hapr/error.hpp"
#include "hapr/grid.hpp"
#include "hapr/model.hpp"
#include "hapr/phy.hpp"
#include "hapr/reservation.hpp"

namespace hapr {

struct AssignmentResult {
  Grid<std::uint8_t> assignment;
  std::size_t requested = 0;  // whole reservations available this frame
  std::size_t assigned = 0;
  bool capped = false;  // requested exceeded what the constraint set allows

  double value(const RateTable& rates) const {
    double s = 0.0;
    for (std::size_t n = 0; n < assignment.rows(); ++n)
      for (std::size_t k = 0; k < assignment.cols(); ++k)
        if (assignment(n, k)) s += rates.r_gas(n, k);
    return s;
  }
};

/// Largest assignment count the constraint set permits.
inline std::size_t assignment_capacity(std::size_t n_users, std::size_t n_haps, bool exclusive) {
  if (n_haps == 0) return 0;
  return exclusive ? std::min(n_users, n_haps) : n_users;
}

namespace detail {

inline AssignmentResult start_result(std::size_t n_s, const RateTable& rates, bool exclusive) {
  AssignmentResult res{Grid<std::uint8_t>(rates.n_users(), rates.n_haps(), 0), n_s, 0, false};
  const std::size_t cap = assignment_capacity(rates.n_users(), rates.n_haps(), exclusive);
  res.assigned = std::min(n_s, cap);
  res.capped = n_s > cap;
  return res;
}

inline std::size_t best_hap(const RateTable& rates, std::size_t n) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < rates.n_haps(); ++k)
    if (rates.r_gas(n, k) > rates.r_gas(n, best)) best = k;
  return best;
}

/// Maximum-weight matching of exactly `count` user-HAP pairs by successive
/// shortest augmenting paths (Bellman-Ford on the residual graph).
inline void max_weight_matching(const RateTable& rates, std::size_t count, Grid<std::uint8_t>& out) {
  const std::size_t n_users = rates.n_users();
  const std::size_t n_haps = rates.n_haps();
  // nodes: 0 source, 1..N users, N+1..N+K haps, N+K+1 sink
  const std::size_t source = 0;
  const std::size_t sink = n_users + n_haps + 1;
  const std::size_t n_nodes = sink + 1;
  struct Edge {
    std::size_t to;
    int cap;
    double cost;
  };
  std::vector<Edge> edges;
  std::vector<std::vector<std::size_t>> adj(n_nodes);
  auto add = [&](std::size_t a, std::size_t b, double cost) {
    adj[a].push_back(edges.size());
    edges.push_back({b, 1, cost});
    adj[b].push_back(edges.size());
    edges.push_back({a, 0, -cost});
  };
  for (std::size_t n = 0; n < n_users; ++n) add(source, 1 + n, 0.0);
  for (std::size_t n = 0; n < n_users; ++n)
    for (std::size_t k = 0; k < n_haps; ++k) add(1 + n, 1 + n_users + k, -rates.r_gas(n, k));
  for (std::size_t k = 0; k < n_haps; ++k) add(1 + n_users + k, sink, 0.0);

  constexpr double inf = std::numeric_limits<double>::infinity();
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  for (std::size_t flow = 0; flow < count; ++flow) {
    std::vector<double> dist(n_nodes, inf);
    std::vector<std::size_t> via(n_nodes, none);
    dist[source] = 0.0;
    for (std::size_t round = 0; round + 1 < n_nodes; ++round) {
      bool changed = false;
      for (std::size_t v = 0; v < n_nodes; ++v) {
        if (dist[v] == inf) continue;
        for (auto e : adj[v]) {
          if (edges[e].cap <= 0) continue;
          const double nd = dist[v] + edges[e].cost;
          if (nd < dist[edges[e].to] - 1e-12 * (1.0 + std::abs(nd))) {
            dist[edges[e].to] = nd;
            via[edges[e].to] = e;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    if (via[sink] == none) break;
    for (std::size_t v = sink; v != source;) {
      const auto e = via[v];
      edges[e].cap -= 1;
      edges[e ^ 1].cap += 1;
      v = edges[e ^ 1].to;
    }
  }
  for (std::size_t n = 0; n < n_users; ++n)
    for (auto e : adj[1 + n])
      if (edges[e].to > n_users && edges[e].to <= n_users + n_haps && edges[e].cap == 0 && (e % 2 == 0))
        out(n, edges[e].to - 1 - n_users) = 1;
}

}  // namespace detail

/// Brute-force optimum over every feasible assignment with exactly
/// min(n_s, capacity) ones. Intended as a reference; N * K must be <= 20.
inline AssignmentResult exhaustive_assignment(std::size_t n_s, const RateTable& rates, bool exclusive) {
  const std::size_t n_users = rates.n_users();
  const std::size_t n_haps = rates.n_haps();
  if (n_users * n_haps > 20)
    throw Error(ErrorCode::invalid_value, "assignment_mode", "exhaustive search needs N*K <= 20");
  auto res = detail::start_result(n_s, rates, exclusive);
  if (res.assigned == 0) return res;

  // Each user picks a HAP index in [0, K] where K means unassigned.
  std::vector<std::size_t> choice(n_users, n_haps);
  std::vector<std::size_t> best;
  double best_value = -std::numeric_limits<double>::infinity();
  for (;;) {
    std::size_t used = 0;
    double value = 0.0;
    std::vector<std::uint8_t> col(n_haps, 0);
    bool ok = true;
    for (std::size_t n = 0; n < n_users && ok; ++n) {
      if (choice[n] == n_haps) continue;
      ++used;
      value += rates.r_gas(n, choice[n]);
      if (exclusive && col[choice[n]]++) ok = false;
    }
    if (ok && used == res.assigned && value > best_value) {
      best_value = value;
      best = choice;
    }
    std::size_t i = 0;
    while (i < n_users && choice[i] == 0) choice[i++] = n_haps;
    if (i == n_users) break;
    --choice[i];
  }
  for (std::size_t n = 0; n < n_users; ++n)
    if (best[n] < n_haps) res.assignment(n, best[n]) = 1;
  return res;
}

/// Maximizes the assigned GAS rate sum with exactly min(n_s, capacity) users
/// assigned. per-user-best lets HAPs be time-shared; one-per-hap allows at
/// most one user per HAP.
inline AssignmentResult solve_assignment(std::size_t n_s, const RateTable& rates, AssignmentMode mode) {
  const std::size_t n_users = rates.n_users();
  switch (mode) {
    case AssignmentMode::exhaustive:
      return exhaustive_assignment(n_s, rates, false);
    case AssignmentMode::per_user_best: {
      auto res = detail::start_result(n_s, rates, false);
      if (res.assigned == 0) return res;
      std::vector<std::size_t> order(n_users);
      std::vector<double> best(n_users);
      for (std::size_t n = 0; n < n_users; ++n) {
        order[n] = n;
        best[n] = rates.r_gas(n, detail::best_hap(rates, n));
      }
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return best[a] > best[b]; });
      for (std::size_t i = 0; i < res.assigned; ++i) res.assignment(order[i], detail::best_hap(rates, order[i])) = 1;
      return res;
    }
    case AssignmentMode::one_per_hap: {
      auto res = detail::start_result(n_s, rates, true);
      if (res.assigned > 0) detail::max_weight_matching(rates, res.assigned, res.assignment);
      return res;
    }
  }
  throw Error(ErrorCode::invalid_value, "assignment_mode", "unknown mode");
}

/// Whole reservations won in one frame, zero when negotiation cannot succeed.
inline std::size_t reservation_count(double n_gas, const SystemConfig& cfg, const MacTimings& t) {
  if (n_gas * cfg.q() < 1.0 - 1e-12) return 0;
  return solve_reservation(n_gas, cfg, t).whole_reservations();
}

/// Assignment step for a uniform rho: the reservation count comes from rp.
inline AssignmentResult solve_assignment(double rho, const RateTable& rates, const ReservationPoint& rp, AssignmentMode mode) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw Error(ErrorCode::range_violation, "rho", "rho outside [0,1]");
  return solve_assignment(rp.whole_reservations(), rates, mode);
}

}  // namespace hapr
