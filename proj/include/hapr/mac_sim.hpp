#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "hapr/error.hpp"
#include "hapr/model.hpp"
#include "hapr/rng.hpp"

namespace hapr {

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

struct SimStats {
  std::uint64_t seed = 0;
  std::size_t n_stations = 0;
  std::uint64_t slots_simulated = 0;
  std::uint64_t tx_attempts = 0;
  std::uint64_t successes = 0;
  std::uint64_t collisions = 0;
  std::uint64_t idles = 0;
  Estimate est_tau;
  Estimate est_ps;
  Estimate est_pe;
  Estimate est_pc;
  Estimate est_util;
};

namespace detail {

/// Standard error of a mean from batch means. Slots within a backoff run are
/// correlated, so this is wider than the iid binomial figure.
inline double batch_se(const std::vector<double>& xs) {
  const auto b = static_cast<double>(xs.size());
  if (xs.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= b;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (b - 1.0) / b);
}

/// Binomial SE with the (x+1)/(n+2) adjustment so it stays positive at 0 and n.
inline double binomial_se(std::uint64_t hits, std::uint64_t trials) {
  const double p = (static_cast<double>(hits) + 1.0) / (static_cast<double>(trials) + 2.0);
  return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

inline Estimate proportion(std::uint64_t hits, std::uint64_t trials, const std::vector<double>& batches) {
  return {static_cast<double>(hits) / static_cast<double>(trials), std::max(batch_se(batches), binomial_se(hits, trials))};
}

struct Station {
  std::uint32_t stage = 0;
  std::uint64_t counter = 0;
};

inline std::uint64_t draw_backoff(Rng& rng, const MacTimings& t, std::uint32_t stage) {
  return rng.uniform_below(std::uint64_t{t.w_min} << stage);
}

}  // namespace detail

inline constexpr std::size_t kSimBatches = 50;

/// Saturated binary-exponential-backoff contention among n stations on one
/// channel. Each generic slot is idle, a success or a collision; idle slots
/// last one slot time, successes t_s and collisions t_c.
inline SimStats simulate_csma(std::size_t n, const MacTimings& t, std::uint64_t slots, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::invalid_count, "n", "need at least one station");
  if (slots < 10000) throw Error(ErrorCode::invalid_value, "slots", "need at least 10^4 slots");

  Rng rng(seed);
  std::vector<detail::Station> st(n);
  for (auto& s : st) s.counter = detail::draw_backoff(rng, t, 0);

  SimStats out;
  out.seed = seed;
  out.n_stations = n;
  const std::uint64_t per_batch = slots / kSimBatches;
  std::vector<double> b_tau, b_ps, b_pe, b_pc, b_util;
  std::uint64_t bt = 0, bs = 0, be = 0, bc = 0, bslots = 0;
  std::vector<std::size_t> tx;
  tx.reserve(n);

  for (std::uint64_t slot = 0; slot < slots; ++slot) {
    tx.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (st[i].counter == 0) tx.push_back(i);
      else --st[i].counter;

    if (tx.empty()) {
      ++be;
    } else if (tx.size() == 1) {
      ++bs;
      st[tx[0]].stage = 0;
      st[tx[0]].counter = detail::draw_backoff(rng, t, 0);
    } else {
      ++bc;
      for (auto i : tx) {
        st[i].stage = std::min(st[i].stage + 1, t.backoff_stages);
        st[i].counter = detail::draw_backoff(rng, t, st[i].stage);
      }
    }
    bt += tx.size();
    ++bslots;

    const bool last = slot + 1 == slots;
    if ((bslots == per_batch && b_ps.size() + 1 < kSimBatches) || last) {
      const auto d = static_cast<double>(bslots);
      b_tau.push_back(static_cast<double>(bt) / (d * static_cast<double>(n)));
      b_ps.push_back(static_cast<double>(bs) / d);
      b_pe.push_back(static_cast<double>(be) / d);
      b_pc.push_back(static_cast<double>(bc) / d);
      const double busy = static_cast<double>(bs) * t.t_s();
      b_util.push_back(busy / (static_cast<double>(be) * t.slot_s + busy + static_cast<double>(bc) * t.t_c()));
      out.tx_attempts += bt;
      out.successes += bs;
      out.idles += be;
      out.collisions += bc;
      bt = bs = be = bc = bslots = 0;
    }
  }

  out.slots_simulated = slots;
  out.est_tau = detail::proportion(out.tx_attempts, slots * n, b_tau);
  out.est_ps = detail::proportion(out.successes, slots, b_ps);
  out.est_pe = detail::proportion(out.idles, slots, b_pe);
  out.est_pc = detail::proportion(out.collisions, slots, b_pc);
  const double busy = static_cast<double>(out.successes) * t.t_s();
  out.est_util.value =
      busy / (static_cast<double>(out.idles) * t.slot_s + busy + static_cast<double>(out.collisions) * t.t_c());
  out.est_util.se = detail::batch_se(b_util);
  if (!(out.est_util.se > 0.0)) out.est_util.se = detail::binomial_se(out.successes, slots);
  return out;
}

struct NegotiationStats {
  std::uint64_t seed = 0;
  std::size_t contenders = 0;  // round(n2 q) stations active in negotiation
  std::uint64_t frames = 0;
  std::uint64_t slots = 0;
  std::uint64_t successes = 0;
  std::uint64_t collisions = 0;
  std::uint64_t idles = 0;
  Estimate zeta_s;
  double mean_reservations = 0.0;  // successful handshakes per negotiation period
};

/// Negotiation periods of length t_h among round(n2 q) active users. After a
/// successful handshake a user stays quiet for a geometric number of slots
/// with mean (1-q)/q, then restarts backoff from the first stage. Station
/// state carries over between frames.
inline NegotiationStats simulate_negotiation(std::size_t n2, double q, const MacTimings& t, std::uint64_t frames,
                                             std::uint64_t seed) {
  if (n2 < 1) throw Error(ErrorCode::invalid_count, "n2", "need at least one user");
  if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorCode::range_violation, "q", "q outside [0,1]");
  if (frames < 100) throw Error(ErrorCode::invalid_value, "frames", "need at least 100 frames");

  NegotiationStats out;
  out.seed = seed;
  out.frames = frames;
  out.contenders = static_cast<std::size_t>(std::llround(static_cast<double>(n2) * q));

  if (out.contenders == 0) {
    out.slots = frames * static_cast<std::uint64_t>(std::ceil(t.negotiation_s / t.slot_s - 1e-9));
    out.idles = out.slots;
    out.zeta_s = {0.0, 0.0};
    return out;
  }

  struct Station {
    std::uint32_t stage = 0;
    std::uint64_t counter = 0;
    std::uint64_t quiet = 0;  // slots left before contending again
  };
  Rng rng(seed);
  std::vector<Station> st(out.contenders);
  for (auto& s : st) s.counter = detail::draw_backoff(rng, t, 0);

  const std::uint64_t frames_per_batch = std::max<std::uint64_t>(1, frames / kSimBatches);
  std::vector<double> batch_zeta;
  std::uint64_t batch_succ = 0, batch_slots = 0;
  std::vector<std::size_t> tx;
  const double t_neg = t.t_s_neg();

  for (std::uint64_t f = 0; f < frames; ++f) {
    double elapsed = 0.0;
    while (elapsed < t.negotiation_s) {
      tx.clear();
      for (std::size_t i = 0; i < st.size(); ++i) {
        auto& s = st[i];
        if (s.quiet > 0) {
          --s.quiet;
          continue;
        }
        if (s.counter == 0) tx.push_back(i);
        else --s.counter;
      }
      if (tx.empty()) {
        ++out.idles;
        elapsed += t.slot_s;
      } else if (tx.size() == 1) {
        ++out.successes;
        ++batch_succ;
        auto& s = st[tx[0]];
        s.stage = 0;
        s.quiet = rng.geometric(q);
        s.counter = detail::draw_backoff(rng, t, 0);
        elapsed += t_neg;
      } else {
        ++out.collisions;
        for (auto i : tx) {
          st[i].stage = std::min(st[i].stage + 1, t.backoff_stages);
          st[i].counter = detail::draw_backoff(rng, t, st[i].stage);
        }
        elapsed += t.t_c();
      }
      ++out.slots;
      ++batch_slots;
    }
    if ((f + 1) % frames_per_batch == 0 || f + 1 == frames) {
      if (batch_slots > 0) batch_zeta.push_back(static_cast<double>(batch_succ) / static_cast<double>(batch_slots));
      batch_succ = batch_slots = 0;
    }
  }

  out.zeta_s.value = static_cast<double>(out.successes) / static_cast<double>(out.slots);
  out.zeta_s.se = std::max(detail::batch_se(batch_zeta), detail::binomial_se(out.successes, out.slots));
  out.mean_reservations = static_cast<double>(out.successes) / static_cast<double>(frames);
  return out;
}

}  // namespace hapr
