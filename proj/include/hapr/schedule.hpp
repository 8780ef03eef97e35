#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hapr/error.hpp"
#include "hapr/model.hpp"
#include "hapr/reservation.hpp"
#include "hapr/rng.hpp"

namespace hapr {

enum class LinkMode : std::uint8_t { g2s, gas };

struct UserPlan {
  LinkMode mode = LinkMode::g2s;
  std::optional<std::size_t> hap;          // set for users holding a reservation
  std::optional<std::size_t> reservation;  // index into FrameSchedule::reservations
  bool gas_unreserved = false;             // picked GAS but has no HAP or lost the draw
};

/// One successful negotiation and the payload slots it buys.
struct Reservation {
  std::size_t user = 0;
  std::size_t hap = 0;
  double handshake_start_s = 0.0;  // within the negotiation period
  double handshake_end_s = 0.0;
  std::size_t first_slot = 0;  // payload slot j starts at t_h + j t_p
  std::size_t slot_count = 0;
};

struct FrameSchedule {
  std::vector<UserPlan> users;
  std::vector<Reservation> reservations;
  std::size_t capacity = 0;  // floor(N_s)
  double step = 0.0;         // payload packets per reservation, r
  double negotiation_s = 0.0;
  double payload_s = 0.0;
  double frame_s = 0.0;
  bool oversubscribed = false;  // more GAS candidates than reservations; truncated at random

  double slot_start(std::size_t j) const { return negotiation_s + static_cast<double>(j) * payload_s; }
  double slot_end(std::size_t j) const { return slot_start(j) + payload_s; }

  double reserved_payload_s() const {
    std::size_t slots = 0;
    for (const auto& r : reservations) slots += r.slot_count;
    return static_cast<double>(slots) * payload_s;
  }
};

/// Runs one frame of the reservation scheme: every user independently takes
/// the GAS link with probability rho_n; assigned GAS users negotiate in turn
/// during t_h and the winners share t_r in consecutive payload slots.
inline FrameSchedule execute_schedule(const Decision& d, const ReservationPoint& rp, const MacTimings& t,
                                      std::uint64_t seed) {
  const std::size_t n_users = d.rho.size();
  if (d.assignment.rows() != n_users)
    throw Error(ErrorCode::shape_mismatch, "assignment", "assignment rows differ from rho length");

  FrameSchedule fs;
  fs.users.resize(n_users);
  fs.capacity = rp.whole_reservations();
  fs.step = fs.capacity > 0 ? t.reserved_s() / (rp.n_reserved * t.payload_s) : 0.0;
  fs.negotiation_s = t.negotiation_s;
  fs.payload_s = t.payload_s;
  fs.frame_s = t.frame_s;

  Rng rng(seed);
  std::vector<std::size_t> candidates;
  for (std::size_t n = 0; n < n_users; ++n) {
    if (!rng.bernoulli(d.rho[n])) continue;
    fs.users[n].mode = LinkMode::gas;
    if (d.hap_of(n))
      candidates.push_back(n);
    else
      fs.users[n].gas_unreserved = true;
  }

  if (candidates.size() > fs.capacity) {
    fs.oversubscribed = true;
    rng.shuffle(std::span<std::size_t>(candidates));
    for (std::size_t i = fs.capacity; i < candidates.size(); ++i) fs.users[candidates[i]].gas_unreserved = true;
    candidates.resize(fs.capacity);
    std::sort(candidates.begin(), candidates.end());
  }

  const double t_neg = t.t_s_neg();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const std::size_t n = candidates[i];
    Reservation r;
    r.user = n;
    r.hap = *d.hap_of(n);
    r.handshake_start_s = static_cast<double>(i) * t_neg;
    r.handshake_end_s = static_cast<double>(i + 1) * t_neg;
    r.first_slot = static_cast<std::size_t>(std::floor(static_cast<double>(i) * fs.step));
    r.slot_count = static_cast<std::size_t>(std::floor(static_cast<double>(i + 1) * fs.step)) - r.first_slot;
    fs.users[n].hap = r.hap;
    fs.users[n].reservation = fs.reservations.size();
    fs.reservations.push_back(r);
  }
  return fs;
}

}  // namespace hapr
