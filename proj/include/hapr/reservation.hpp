#pragma once

#include <cmath>
#include <cstddef>
#include <optional>

#include "hapr/csma.hpp"
#include "hapr/error.hpp"
#include "hapr/model.hpp"

namespace hapr {

/// Solved negotiation-period state for the GAS reservation scheme.
struct ReservationPoint {
  double n_gas = 0.0;        // users choosing GAS (real-valued)
  double q = 0.0;            // probability a user is in the negotiation state
  double contenders = 0.0;   // n_gas * q
  double epsilon = 0.0;      // per-slot transmit probability during negotiation
  double varrho = 0.0;       // collision probability during negotiation
  double zeta_s = 0.0;       // per-slot successful-negotiation probability
  double n_reserved = 0.0;   // users that reserve a HAP per frame (real-valued)
  double step = 0.0;         // payload packets per reserved user per frame
  double beta = 0.0;         // per-user channel utilization t_p * step / T
  double residual = 0.0;
  bool exceeds_haps = false;  // n_reserved > K

  bool has_capacity() const noexcept { return zeta_s > 0.0; }
  /// Whole users the executor can actually serve.
  std::size_t whole_reservations() const noexcept {
    return has_capacity() ? static_cast<std::size_t>(std::floor(n_reserved + 1e-9)) : 0;
  }
};

struct ReservationCapacity {
  double n_reserved = 0.0;
  std::optional<double> step;  // empty when no negotiation ever succeeds

  bool empty() const noexcept { return !step.has_value(); }
};

/// Negotiation transmit probability for a station that, after each success,
/// waits a geometric idle period with mean (1-q)/q before its next packet:
///   2(1-2r)q / (q[(W+1)(1-2r) + rW(1-(2r)^l)] + 2(1-q)(1-r)(1-2r)),
/// with the common (1-2r) factor cancelled.
inline double negotiation_transmit_probability(double varrho, double q, std::uint32_t w, std::uint32_t stages) {
  const double wd = static_cast<double>(w);
  return 2.0 * q / (q * ((wd + 1.0) + varrho * wd * backoff_series(2.0 * varrho, stages)) + 2.0 * (1.0 - q) * (1.0 - varrho));
}

/// N_s = t_h zeta_s / t_s' and r = t_r / (N_s t_p).
inline ReservationCapacity reservation_capacity(const ReservationPoint& rp, const MacTimings& t) {
  ReservationCapacity cap;
  cap.n_reserved = t.negotiation_s * rp.zeta_s / t.t_s_neg();
  if (cap.n_reserved > 0.0) cap.step = t.reserved_s() / (cap.n_reserved * t.payload_s);
  return cap;
}

namespace detail {

template <typename H>
bool sampled_increasing(H&& h, int samples = 64) {
  double prev = h(1e-9);
  for (int i = 1; i <= samples; ++i) {
    const double x = (i == samples) ? 1.0 - 1e-9 : static_cast<double>(i) / samples;
    const double v = h(x);
    if (v < prev) return false;
    prev = v;
  }
  return true;
}

}  // namespace detail

/// Solves the negotiation fixed point for n_gas GAS users and derives the
/// reservation count, step and per-user utilization. Requires n_gas * q >= 1.
inline ReservationPoint solve_reservation(double n_gas, const SystemConfig& cfg, const MacTimings& t, double tol = 1e-12) {
  if (!std::isfinite(n_gas) || n_gas < 0.0)
    throw Error(ErrorCode::invalid_count, "n_gas", "GAS population must be finite and >= 0");
  if (!(tol > 0.0)) throw Error(ErrorCode::invalid_value, "tol", "tolerance must be > 0");

  ReservationPoint rp;
  rp.n_gas = n_gas;
  rp.q = cfg.q();
  rp.contenders = n_gas * rp.q;
  if (rp.contenders < 1.0 - 1e-12)
    throw Error(ErrorCode::subunit_population, "n_gas",
                "effective negotiation population " + std::to_string(rp.contenders) + " is below one contender");
  const double nc = std::max(rp.contenders, 1.0);

  auto eps_of = [&](double eps) {
    return negotiation_transmit_probability(collision_probability(eps, nc), rp.q, t.w_min, t.backoff_stages);
  };

  if (nc - 1.0 <= 1e-12) {
    rp.varrho = 0.0;
    rp.epsilon = negotiation_transmit_probability(0.0, rp.q, t.w_min, t.backoff_stages);
    rp.residual = 0.0;
  } else {
    auto h = [&](double eps) { return eps - eps_of(eps); };
    detail::FixedPoint fp{};
    if (detail::sampled_increasing(h)) {
      fp = detail::bisect_fixed_point(eps_of, 1e-12, 1.0 - 1e-12);
    } else {
      fp = detail::damped_fixed_point(eps_of, negotiation_transmit_probability(0.0, rp.q, t.w_min, t.backoff_stages), tol);
      if (fp.iterations < 0) fp = detail::bisect_fixed_point(eps_of, 1e-12, 1.0 - 1e-12);
    }
    if (!(fp.residual <= tol))
      throw Error(ErrorCode::no_convergence, "epsilon", "fixed-point residual " + std::to_string(fp.residual) + " above tolerance");
    rp.epsilon = fp.x;
    rp.residual = fp.residual;
    rp.varrho = collision_probability(rp.epsilon, nc);
  }

  rp.zeta_s = nc * rp.epsilon * std::exp((nc - 1.0) * std::log1p(-rp.epsilon));
  const auto cap = reservation_capacity(rp, t);
  rp.n_reserved = cap.n_reserved;
  if (cap.step) {
    rp.step = *cap.step;
    rp.beta = t.payload_s * rp.step / t.frame_s;
  }
  rp.exceeds_haps = rp.n_reserved > static_cast<double>(cfg.n_haps);
  return rp;
}

}  // namespace hapr
