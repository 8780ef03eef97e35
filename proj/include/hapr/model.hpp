#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hapr/error.hpp"
#include "hapr/grid.hpp"

namespace hapr {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double distance(const Vec3& a, const Vec3& b) {
  return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z);
}

struct Geometry {
  std::vector<Vec3> user_positions;
  std::vector<Vec3> hap_positions;
  Vec3 satellite_position{0.0, 0.0, 780e3};
  double carrier_freq_hz = 2e9;
};

/// Path losses in dB. Overrides geometry when present in a config.
struct LinkBudget {
  std::vector<double> loss_g2s_db;  // N
  Grid<double> loss_gu_hap_db;      // N x K
  std::vector<double> loss_hap_sat_db;  // K

  std::size_t n_users() const noexcept { return loss_g2s_db.size(); }
  std::size_t n_haps() const noexcept { return loss_hap_sat_db.size(); }
};

/// How the per-sub-channel utilization is credited to each G2S user.
enum class G2sUtilization {
  per_station,  // each of the N1 contenders receives phi / N1 of the channel
  aggregate,    // each contender is credited with the full phi
};

enum class AssignmentMode { exhaustive, per_user_best, one_per_hap };

constexpr std::string_view to_string(G2sUtilization u) {
  return u == G2sUtilization::per_station ? "per-station" : "aggregate";
}

constexpr std::string_view to_string(AssignmentMode m) {
  switch (m) {
    case AssignmentMode::exhaustive: return "exhaustive";
    case AssignmentMode::per_user_best: return "per-user-best";
    case AssignmentMode::one_per_hap: return "one-per-hap";
  }
  return "unknown";
}

struct SystemConfig {
  std::size_t n_users = 100;
  std::size_t n_haps = 2;
  std::size_t n_subchannels = 5;
  double bandwidth_hz = 20e6;
  double w1 = 0.5;
  double w2 = 0.5;
  double tx_power_g2s_w = 2.0;
  double tx_power_gas_user_w = 0.2;
  double tx_power_hap_w = 10.0;
  double noise_g2s_w = 1e-13;  // -100 dBm
  double noise_gu_hap_w = 1e-13;
  double noise_hap_sat_w = 1e-13;
  double arrival_rate = 9.0;
  double service_rate = 1.0;
  std::optional<Geometry> geometry;
  std::optional<LinkBudget> losses;
  G2sUtilization g2s_utilization = G2sUtilization::per_station;
  AssignmentMode assignment_mode = AssignmentMode::per_user_best;

  /// Stationary probability that a user sits in the negotiation period.
  double q() const noexcept { return service_rate / (arrival_rate + service_rate); }
};

/// Every time constant of both MAC schemes, in seconds.
struct MacTimings {
  double slot_s = 50e-6;
  double sifs_s = 28e-6;
  double difs_s = 128e-6;
  double rts_s = 192e-6;  // 24 bytes at 1 Mb/s
  double cts_s = 128e-6;  // 16 bytes at 1 Mb/s
  double payload_s = 0.5e-3;
  double frame_s = 0.2;
  double negotiation_s = 0.01;
  std::uint32_t w_min = 32;
  std::uint32_t backoff_stages = 5;

  static constexpr double rts_bytes = 24.0;
  static constexpr double cts_bytes = 16.0;

  static double control_frame_s(double bytes, double rate_bps) { return bytes * 8.0 / rate_bps; }

  void set_control_rate(double rate_bps) {
    rts_s = control_frame_s(rts_bytes, rate_bps);
    cts_s = control_frame_s(cts_bytes, rate_bps);
  }

  /// Busy time of a successful RTS/CTS/DATA exchange.
  double t_s() const noexcept { return rts_s + cts_s + payload_s + 2 * sifs_s + difs_s + 2 * slot_s; }
  /// Busy time of an RTS collision.
  double t_c() const noexcept { return rts_s + difs_s + slot_s; }
  /// Negotiation handshake time.
  double t_s_neg() const noexcept { return rts_s + cts_s + sifs_s + difs_s; }
  double reserved_s() const noexcept { return frame_s - negotiation_s; }
  std::uint64_t w_max() const noexcept { return std::uint64_t{w_min} << backoff_stages; }
};

/// Transmission-control strategy: per-user GAS probability and HAP choice.
struct Decision {
  std::vector<double> rho;         // N
  Grid<std::uint8_t> assignment;   // N x K

  std::size_t assigned_count() const {
    std::size_t n = 0;
    for (auto v : assignment.flat()) n += v;
    return n;
  }

  /// HAP index chosen by user n, or nullopt.
  std::optional<std::size_t> hap_of(std::size_t n) const {
    for (std::size_t k = 0; k < assignment.cols(); ++k)
      if (assignment(n, k)) return k;
    return std::nullopt;
  }
};

/// A configuration whose invariants have been checked. Immutable by convention.
struct Scenario {
  SystemConfig config;
  MacTimings timings;
};

namespace detail {

inline void check_positive(std::vector<Issue>& out, double v, const char* field, ErrorCode code) {
  if (!(v > 0.0) || !std::isfinite(v)) out.push_back({code, field, "must be > 0, got " + std::to_string(v)});
}

inline void check_geometry(std::vector<Issue>& out, const SystemConfig& cfg) {
  const auto& g = *cfg.geometry;
  if (g.user_positions.size() != cfg.n_users)
    out.push_back({ErrorCode::shape_mismatch, "user_positions",
                   "expected " + std::to_string(cfg.n_users) + " entries, got " + std::to_string(g.user_positions.size())});
  if (g.hap_positions.size() != cfg.n_haps)
    out.push_back({ErrorCode::shape_mismatch, "hap_positions",
                   "expected " + std::to_string(cfg.n_haps) + " entries, got " + std::to_string(g.hap_positions.size())});
  check_positive(out, g.carrier_freq_hz, "carrier_freq_hz", ErrorCode::invalid_value);
  for (std::size_t n = 0; n < g.user_positions.size(); ++n) {
    if (!(distance(g.user_positions[n], g.satellite_position) > 0.0))
      out.push_back({ErrorCode::invalid_value, "user_positions", "user " + std::to_string(n) + " coincides with the satellite"});
    for (std::size_t k = 0; k < g.hap_positions.size(); ++k)
      if (!(distance(g.user_positions[n], g.hap_positions[k]) > 0.0))
        out.push_back({ErrorCode::invalid_value, "user_positions",
                       "user " + std::to_string(n) + " coincides with hap " + std::to_string(k)});
  }
  for (std::size_t k = 0; k < g.hap_positions.size(); ++k)
    if (!(distance(g.hap_positions[k], g.satellite_position) > 0.0))
      out.push_back({ErrorCode::invalid_value, "hap_positions", "hap " + std::to_string(k) + " coincides with the satellite"});
}

inline void check_losses(std::vector<Issue>& out, const SystemConfig& cfg) {
  const auto& b = *cfg.losses;
  if (b.loss_g2s_db.size() != cfg.n_users)
    out.push_back({ErrorCode::shape_mismatch, "loss_g2s_db", "expected " + std::to_string(cfg.n_users) + " entries"});
  if (b.loss_hap_sat_db.size() != cfg.n_haps)
    out.push_back({ErrorCode::shape_mismatch, "loss_hap_sat_db", "expected " + std::to_string(cfg.n_haps) + " entries"});
  if (b.loss_gu_hap_db.rows() != cfg.n_users || b.loss_gu_hap_db.cols() != cfg.n_haps)
    out.push_back({ErrorCode::shape_mismatch, "loss_gu_hap_db",
                   "expected " + std::to_string(cfg.n_users) + "x" + std::to_string(cfg.n_haps)});
  auto finite_nonneg = [&](std::span<const double> xs, const char* field) {
    for (double v : xs)
      if (!std::isfinite(v) || v < 0.0) {
        out.push_back({ErrorCode::invalid_value, field, "entries must be finite and >= 0 dB"});
        return;
      }
  };
  finite_nonneg(b.loss_g2s_db, "loss_g2s_db");
  finite_nonneg(b.loss_gu_hap_db.flat(), "loss_gu_hap_db");
  finite_nonneg(b.loss_hap_sat_db, "loss_hap_sat_db");
}

}  // namespace detail

/// Checks every config and timing invariant. Throws one Error listing all violations.
inline Scenario validate_config(const SystemConfig& cfg, const MacTimings& t) {
  using detail::check_positive;
  std::vector<Issue> issues;

  if (cfg.n_users < 1) issues.push_back({ErrorCode::empty_population, "n_users", "at least one ground user is required"});
  if (cfg.n_subchannels < 1)
    issues.push_back({ErrorCode::empty_population, "n_subchannels", "at least one sub-channel is required"});

  if (!(cfg.w1 > 0.0)) issues.push_back({ErrorCode::invalid_weight, "w1", "must be > 0"});
  if (!(cfg.w2 > 0.0)) issues.push_back({ErrorCode::invalid_weight, "w2", "must be > 0"});
  if (cfg.w1 + cfg.w2 > 1.0 + 1e-12)
    issues.push_back({ErrorCode::invalid_weight, "w1+w2", "bandwidth weights sum to " + std::to_string(cfg.w1 + cfg.w2) + " > 1"});

  check_positive(issues, cfg.bandwidth_hz, "bandwidth_hz", ErrorCode::invalid_value);
  check_positive(issues, cfg.tx_power_g2s_w, "tx_power_g2s_w", ErrorCode::invalid_value);
  check_positive(issues, cfg.tx_power_gas_user_w, "tx_power_gas_user_w", ErrorCode::invalid_value);
  check_positive(issues, cfg.tx_power_hap_w, "tx_power_hap_w", ErrorCode::invalid_value);
  check_positive(issues, cfg.noise_g2s_w, "noise_g2s_w", ErrorCode::invalid_value);
  check_positive(issues, cfg.noise_gu_hap_w, "noise_gu_hap_w", ErrorCode::invalid_value);
  check_positive(issues, cfg.noise_hap_sat_w, "noise_hap_sat_w", ErrorCode::invalid_value);
  check_positive(issues, cfg.arrival_rate, "arrival_rate", ErrorCode::invalid_value);
  check_positive(issues, cfg.service_rate, "service_rate", ErrorCode::invalid_value);

  if (cfg.losses)
    detail::check_losses(issues, cfg);
  else if (cfg.geometry)
    detail::check_geometry(issues, cfg);
  else
    issues.push_back({ErrorCode::invalid_value, "geometry", "either geometry or explicit path-loss matrices are required"});

  check_positive(issues, t.slot_s, "slot_s", ErrorCode::nonpositive_duration);
  check_positive(issues, t.sifs_s, "sifs_s", ErrorCode::nonpositive_duration);
  check_positive(issues, t.difs_s, "difs_s", ErrorCode::nonpositive_duration);
  check_positive(issues, t.rts_s, "rts_s", ErrorCode::nonpositive_duration);
  check_positive(issues, t.cts_s, "cts_s", ErrorCode::nonpositive_duration);
  check_positive(issues, t.payload_s, "payload_s", ErrorCode::nonpositive_duration);
  check_positive(issues, t.frame_s, "frame_s", ErrorCode::nonpositive_duration);
  check_positive(issues, t.negotiation_s, "negotiation_s", ErrorCode::nonpositive_duration);
  if (t.negotiation_s > 0.0 && t.frame_s > 0.0 && !(t.negotiation_s < t.frame_s))
    issues.push_back({ErrorCode::invalid_value, "negotiation_s", "negotiation period must be shorter than the frame"});
  if (t.w_min < 1) issues.push_back({ErrorCode::invalid_value, "w_min", "contention window must be >= 1"});
  if (t.backoff_stages > 30) issues.push_back({ErrorCode::invalid_value, "backoff_stages", "at most 30 stages supported"});

  if (!issues.empty()) throw Error(std::move(issues));
  return Scenario{cfg, t};
}

/// Checks C1-C4 for a decision against a reservation count n_s.
inline const Decision& validate_decision(const Decision& d, std::size_t n_s) {
  std::vector<Issue> issues;
  if (d.rho.size() != d.assignment.rows())
    issues.push_back({ErrorCode::shape_mismatch, "assignment",
                      "rho has " + std::to_string(d.rho.size()) + " users, assignment has " + std::to_string(d.assignment.rows())});
  for (std::size_t n = 0; n < d.rho.size(); ++n)
    if (!(d.rho[n] >= 0.0 && d.rho[n] <= 1.0))
      issues.push_back({ErrorCode::range_violation, "rho", "rho[" + std::to_string(n) + "] outside [0,1]"});

  std::size_t total = 0;
  for (std::size_t n = 0; n < d.assignment.rows(); ++n) {
    std::size_t row = 0;
    for (auto v : d.assignment.row(n)) {
      if (v > 1) issues.push_back({ErrorCode::range_violation, "assignment", "entry in row " + std::to_string(n) + " is not binary"});
      row += v;
    }
    if (row > 1)
      issues.push_back({ErrorCode::row_sum_violation, "assignment", "user " + std::to_string(n) + " assigned to " + std::to_string(row) + " HAPs"});
    total += row;
  }
  if (total != n_s)
    issues.push_back({ErrorCode::count_violation, "assignment",
                      "total assignments " + std::to_string(total) + " != n_s " + std::to_string(n_s)});

  if (!issues.empty()) throw Error(std::move(issues));
  return d;
}

inline const Decision& validate_decision(const Decision& d, std::size_t n_s, const SystemConfig& cfg) {
  if (d.rho.size() != cfg.n_users || d.assignment.rows() != cfg.n_users || d.assignment.cols() != cfg.n_haps)
    throw Error(ErrorCode::shape_mismatch, "decision",
                "expected " + std::to_string(cfg.n_users) + "x" + std::to_string(cfg.n_haps));
  return validate_decision(d, n_s);
}

inline Decision uniform_decision(std::size_t n_users, std::size_t n_haps, double rho) {
  return Decision{std::vector<double>(n_users, rho), Grid<std::uint8_t>(n_users, n_haps, 0)};
}

}  // namespace hapr
