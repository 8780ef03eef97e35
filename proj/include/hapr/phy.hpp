#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>

#include "hapr/error.hpp"
#include "hapr/grid.hpp"
#include "hapr/model.hpp"
#include "hapr/rng.hpp"

namespace hapr {

inline constexpr double kSpeedOfLight = 299792458.0;

/// Free-space path loss 20 log10(4 pi d f / c) in dB.
inline double path_loss_fspl(double distance_m, double freq_hz) {
  if (!(distance_m > 0.0)) throw Error(ErrorCode::nonpositive_input, "distance_m", "distance must be > 0");
  if (!(freq_hz > 0.0)) throw Error(ErrorCode::nonpositive_input, "freq_hz", "frequency must be > 0");
  return 20.0 * std::log10(4.0 * std::numbers::pi * distance_m * freq_hz / kSpeedOfLight);
}

/// End-to-end amplify-and-forward SNR r1 r2 / (r1 + r2 + 1).
inline double af_gain(double snr_first_hop, double snr_second_hop) {
  if (snr_first_hop < 0.0 || snr_second_hop < 0.0 || std::isnan(snr_first_hop) || std::isnan(snr_second_hop))
    throw Error(ErrorCode::negative_input, "snr", "SNRs must be >= 0");
  return snr_first_hop * snr_second_hop / (snr_first_hop + snr_second_hop + 1.0);
}

inline double received_snr(double power_w, double loss_db, double noise_w) {
  return power_w * std::pow(10.0, -loss_db / 10.0) / noise_w;
}

struct RateTable {
  std::vector<double> r_g2s;     // N, bit/s
  Grid<double> r_gas;            // N x K, bit/s
  Grid<double> snr_gu_hap;       // N x K
  std::vector<double> snr_hap_sat;  // K

  std::size_t n_users() const noexcept { return r_g2s.size(); }
  std::size_t n_haps() const noexcept { return snr_hap_sat.size(); }
};

namespace detail {

inline void check_budget_shape(const SystemConfig& cfg, const LinkBudget& b) {
  if (b.loss_g2s_db.size() != cfg.n_users || b.loss_gu_hap_db.rows() != cfg.n_users ||
      b.loss_gu_hap_db.cols() != cfg.n_haps || b.loss_hap_sat_db.size() != cfg.n_haps)
    throw Error(ErrorCode::shape_mismatch, "link_budget",
                "budget does not match N=" + std::to_string(cfg.n_users) + ", K=" + std::to_string(cfg.n_haps));
}

}  // namespace detail

/// (w1 B / M) log2(1 + E 10^{-L/10} / sigma0^2)
inline double g2s_rate(std::size_t n, const SystemConfig& cfg, const LinkBudget& b) {
  if (n >= b.loss_g2s_db.size()) throw Error(ErrorCode::index_out_of_range, "n", "user index " + std::to_string(n));
  const double snr = received_snr(cfg.tx_power_g2s_w, b.loss_g2s_db[n], cfg.noise_g2s_w);
  return cfg.w1 * cfg.bandwidth_hz / static_cast<double>(cfg.n_subchannels) * std::log2(1.0 + snr);
}

/// w2 B log2(1 + f(r_nk, r_ks)) for user n relayed by HAP k.
inline double gas_rate(std::size_t n, std::size_t k, const SystemConfig& cfg, const LinkBudget& b) {
  if (n >= b.loss_gu_hap_db.rows()) throw Error(ErrorCode::index_out_of_range, "n", "user index " + std::to_string(n));
  if (k >= b.loss_hap_sat_db.size()) throw Error(ErrorCode::index_out_of_range, "k", "hap index " + std::to_string(k));
  const double up = received_snr(cfg.tx_power_gas_user_w, b.loss_gu_hap_db(n, k), cfg.noise_gu_hap_w);
  const double down = received_snr(cfg.tx_power_hap_w, b.loss_hap_sat_db[k], cfg.noise_hap_sat_w);
  return cfg.w2 * cfg.bandwidth_hz * std::log2(1.0 + af_gain(up, down));
}

inline RateTable build_rate_table(const SystemConfig& cfg, const LinkBudget& b) {
  detail::check_budget_shape(cfg, b);
  const std::size_t n_users = cfg.n_users;
  const std::size_t n_haps = cfg.n_haps;
  RateTable rt{std::vector<double>(n_users), Grid<double>(n_users, n_haps), Grid<double>(n_users, n_haps),
               std::vector<double>(n_haps)};
  for (std::size_t k = 0; k < n_haps; ++k)
    rt.snr_hap_sat[k] = received_snr(cfg.tx_power_hap_w, b.loss_hap_sat_db[k], cfg.noise_hap_sat_w);
  for (std::size_t n = 0; n < n_users; ++n) {
    rt.r_g2s[n] = g2s_rate(n, cfg, b);
    for (std::size_t k = 0; k < n_haps; ++k) {
      rt.snr_gu_hap(n, k) = received_snr(cfg.tx_power_gas_user_w, b.loss_gu_hap_db(n, k), cfg.noise_gu_hap_w);
      rt.r_gas(n, k) = gas_rate(n, k, cfg, b);
    }
  }
  return rt;
}

/// Free-space link budget from positions.
inline LinkBudget link_budget_from_geometry(const Geometry& g) {
  const std::size_t n_users = g.user_positions.size();
  const std::size_t n_haps = g.hap_positions.size();
  LinkBudget b{std::vector<double>(n_users), Grid<double>(n_users, n_haps), std::vector<double>(n_haps)};
  for (std::size_t n = 0; n < n_users; ++n) {
    b.loss_g2s_db[n] = path_loss_fspl(distance(g.user_positions[n], g.satellite_position), g.carrier_freq_hz);
    for (std::size_t k = 0; k < n_haps; ++k)
      b.loss_gu_hap_db(n, k) = path_loss_fspl(distance(g.user_positions[n], g.hap_positions[k]), g.carrier_freq_hz);
  }
  for (std::size_t k = 0; k < n_haps; ++k)
    b.loss_hap_sat_db[k] = path_loss_fspl(distance(g.hap_positions[k], g.satellite_position), g.carrier_freq_hz);
  return b;
}

/// Explicit losses win over geometry.
inline LinkBudget build_link_budget(const SystemConfig& cfg) {
  if (cfg.losses) return *cfg.losses;
  if (cfg.geometry) return link_budget_from_geometry(*cfg.geometry);
  throw Error(ErrorCode::invalid_value, "geometry", "config has neither geometry nor path-loss matrices");
}

inline RateTable build_rate_table(const SystemConfig& cfg) { return build_rate_table(cfg, build_link_budget(cfg)); }

/// Parameters of the generated reference layout: users uniform in a ground
/// disc, HAPs evenly spaced on a ring above it, satellite at zenith.
struct DiscLayout {
  double disc_radius_m = 10e3;
  double hap_altitude_m = 20e3;
  double hap_ring_radius_m = 5e3;
  double satellite_altitude_m = 780e3;
  double carrier_freq_hz = 2e9;
  std::uint64_t seed = 7;
};

/// User i depends only on (seed, i), so a layout for N users is a prefix of
/// the layout for N + 1.
inline Geometry make_disc_geometry(std::size_t n_users, std::size_t n_haps, const DiscLayout& layout) {
  Geometry g;
  g.carrier_freq_hz = layout.carrier_freq_hz;
  g.satellite_position = {0.0, 0.0, layout.satellite_altitude_m};
  Rng rng(layout.seed);
  g.user_positions.reserve(n_users);
  for (std::size_t i = 0; i < n_users; ++i) {
    const double radius = layout.disc_radius_m * std::sqrt(rng.uniform01());
    const double angle = 2.0 * std::numbers::pi * rng.uniform01();
    g.user_positions.push_back({radius * std::cos(angle), radius * std::sin(angle), 0.0});
  }
  for (std::size_t k = 0; k < n_haps; ++k) {
    if (n_haps == 1) {
      g.hap_positions.push_back({0.0, 0.0, layout.hap_altitude_m});
      continue;
    }
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n_haps);
    g.hap_positions.push_back(
        {layout.hap_ring_radius_m * std::cos(angle), layout.hap_ring_radius_m * std::sin(angle), layout.hap_altitude_m});
  }
  return g;
}

}  // namespace hapr
