#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "hapr/csma.hpp"
#include "hapr/error.hpp"
#include "hapr/model.hpp"
#include "hapr/phy.hpp"
#include "hapr/reservation.hpp"

namespace hapr {

struct ThroughputReport {
  std::size_t n_users = 0;
  double rho = 0.0;  // mean GAS probability
  double s_g2s = 0.0;
  double s_gas = 0.0;
  double s_sum = 0.0;
  double normalized = 0.0;  // s_sum / B, bit/s/Hz
  double alpha = 0.0;       // per-user G2S utilization actually applied
  double beta = 0.0;        // per-user GAS utilization actually applied
  double n1 = 0.0;
  double n2 = 0.0;
  double n_reserved = 0.0;
  bool contention_clamped = false;  // 0 < N1 < 1 evaluated at one contender
  bool gas_subunit = false;         // N2 q < 1: no negotiation possible, GAS term is zero
};

inline double sum_of(std::span<const double> xs) { return std::accumulate(xs.begin(), xs.end(), 0.0); }

/// Per-user G2S utilization: phi shared among the contenders, or phi itself.
inline double g2s_alpha(const ContentionPoint& cp, const MacTimings& t, const SystemConfig& cfg) {
  const double phi = utilization(cp, t);
  return cfg.g2s_utilization == G2sUtilization::per_station ? phi / cp.n_contenders : phi;
}

/// sum_m sum_n alpha (1 - rho_n) R_n = M alpha sum_n (1 - rho_n) R_n.
inline double throughput_g2s(std::span<const double> rho, const RateTable& rates, const ContentionPoint& cp,
                             const MacTimings& t, const SystemConfig& cfg) {
  if (rho.size() != rates.n_users()) throw Error(ErrorCode::shape_mismatch, "rho", "rho length differs from rate table");
  const double n1 = static_cast<double>(rho.size()) - sum_of(rho);
  if (n1 <= 1e-12) return 0.0;
  if (std::abs(cp.n_contenders - std::max(n1, 1.0)) > 1e-6)
    throw Error(ErrorCode::stale_contention_point, "n_contenders",
                "point solved for " + std::to_string(cp.n_contenders) + " contenders, rho implies " + std::to_string(n1));
  double weighted = 0.0;
  for (std::size_t n = 0; n < rho.size(); ++n) weighted += (1.0 - rho[n]) * rates.r_g2s[n];
  return static_cast<double>(cfg.n_subchannels) * g2s_alpha(cp, t, cfg) * weighted;
}

namespace detail {

inline void check_assignment(const Grid<std::uint8_t>& u, const RateTable& rates) {
  if (u.rows() != rates.n_users() || u.cols() != rates.n_haps())
    throw Error(ErrorCode::shape_mismatch, "assignment", "assignment shape differs from rate table");
  for (std::size_t n = 0; n < u.rows(); ++n) {
    unsigned row = 0;
    for (auto v : u.row(n)) {
      if (v > 1) throw Error(ErrorCode::constraint_violation, "assignment", "non-binary entry in row " + std::to_string(n));
      row += v;
    }
    if (row > 1)
      throw Error(ErrorCode::constraint_violation, "assignment", "user " + std::to_string(n) + " assigned to several HAPs");
  }
}

}  // namespace detail

/// sum_n sum_k beta rho_n u_nk R_nk with beta = t_p r / T.
inline double throughput_gas(std::span<const double> rho, const Grid<std::uint8_t>& assignment, const RateTable& rates,
                             const ReservationPoint& rp, const MacTimings& t) {
  if (rho.size() != rates.n_users()) throw Error(ErrorCode::shape_mismatch, "rho", "rho length differs from rate table");
  detail::check_assignment(assignment, rates);
  const double n2 = sum_of(rho);
  if (std::abs(rp.n_gas - n2) > 1e-6)
    throw Error(ErrorCode::stale_reservation_point, "n_gas",
                "point solved for " + std::to_string(rp.n_gas) + " GAS users, rho implies " + std::to_string(n2));
  if (!rp.has_capacity()) return 0.0;
  const double beta = t.payload_s * rp.step / t.frame_s;
  double s = 0.0;
  for (std::size_t n = 0; n < rho.size(); ++n)
    for (std::size_t k = 0; k < assignment.cols(); ++k)
      if (assignment(n, k)) s += beta * rho[n] * rates.r_gas(n, k);
  return s;
}

/// Overall throughput for arbitrary per-user rho, solving both MAC fixed
/// points at N1 = N - sum(rho) and N2 = sum(rho).
inline ThroughputReport case1_sum(std::span<const double> rho, const Grid<std::uint8_t>& assignment, const RateTable& rates,
                                  const MacTimings& t, const SystemConfig& cfg) {
  if (rho.size() != rates.n_users()) throw Error(ErrorCode::shape_mismatch, "rho", "rho length differs from rate table");
  if (rho.empty()) throw Error(ErrorCode::invalid_count, "n_users", "no users");
  ThroughputReport rep;
  rep.n_users = rho.size();
  rep.n2 = sum_of(rho);
  rep.n1 = static_cast<double>(rho.size()) - rep.n2;
  rep.rho = rep.n2 / static_cast<double>(rho.size());

  if (rep.n1 > 1e-12) {
    const auto cp = solve_contention(rep.n1, t);
    rep.contention_clamped = cp.clamped;
    rep.alpha = g2s_alpha(cp, t, cfg);
    rep.s_g2s = throughput_g2s(rho, rates, cp, t, cfg);
  }

  if (rep.n2 * cfg.q() >= 1.0 - 1e-12) {
    const auto rp = solve_reservation(rep.n2, cfg, t);
    rep.n_reserved = rp.n_reserved;
    rep.beta = rp.beta;
    rep.s_gas = throughput_gas(rho, assignment, rates, rp, t);
  } else {
    detail::check_assignment(assignment, rates);
    rep.gas_subunit = true;
  }

  rep.s_sum = rep.s_g2s + rep.s_gas;
  rep.normalized = rep.s_sum / cfg.bandwidth_hz;
  return rep;
}

inline ThroughputReport case1_sum(double rho, const Grid<std::uint8_t>& assignment, const RateTable& rates,
                                  const MacTimings& t, const SystemConfig& cfg) {
  const std::vector<double> r(rates.n_users(), rho);
  return case1_sum(std::span<const double>(r), assignment, rates, t, cfg);
}

/// Every user on the contention link, solved at N1 = N.
inline ThroughputReport case2_g2s_only(const RateTable& rates, const MacTimings& t, const SystemConfig& cfg) {
  const std::size_t n_users = rates.n_users();
  if (n_users == 0) throw Error(ErrorCode::invalid_count, "n_users", "need at least one user");
  const auto cp = solve_contention(static_cast<double>(n_users), t);
  ThroughputReport rep;
  rep.n_users = n_users;
  rep.n1 = static_cast<double>(n_users);
  rep.alpha = g2s_alpha(cp, t, cfg);
  rep.s_g2s = static_cast<double>(cfg.n_subchannels) * rep.alpha * sum_of(rates.r_g2s);
  rep.s_sum = rep.s_g2s;
  rep.normalized = rep.s_sum / cfg.bandwidth_hz;
  return rep;
}

/// Every user on the reserved relay link, solved at N2 = N. The coefficient is
/// w2 B t_r t_s' / (T t_h zeta_s) applied to the assigned log-rates.
inline ThroughputReport case3_gas_only(const Grid<std::uint8_t>& assignment, const RateTable& rates, const MacTimings& t,
                                       const SystemConfig& cfg) {
  const std::size_t n_users = rates.n_users();
  if (n_users == 0) throw Error(ErrorCode::invalid_count, "n_users", "need at least one user");
  detail::check_assignment(assignment, rates);
  ThroughputReport rep;
  rep.n_users = n_users;
  rep.rho = 1.0;
  rep.n2 = static_cast<double>(n_users);
  if (rep.n2 * cfg.q() < 1.0 - 1e-12) {
    rep.gas_subunit = true;
  } else {
    const auto rp = solve_reservation(rep.n2, cfg, t);
    rep.n_reserved = rp.n_reserved;
    if (rp.has_capacity()) {
      const double coeff = t.reserved_s() * t.t_s_neg() / (t.frame_s * t.negotiation_s * rp.zeta_s);
      rep.beta = rp.beta;
      for (std::size_t n = 0; n < n_users; ++n)
        for (std::size_t k = 0; k < assignment.cols(); ++k)
          if (assignment(n, k)) rep.s_gas += coeff * rates.r_gas(n, k);
    }
  }
  rep.s_sum = rep.s_gas;
  rep.normalized = rep.s_sum / cfg.bandwidth_hz;
  return rep;
}

}  // namespace hapr
