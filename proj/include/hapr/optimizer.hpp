#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hapr/assignment.hpp"
#include "hapr/error.hpp"
#include "hapr/model.hpp"
#include "hapr/phy.hpp"
#include "hapr/throughput.hpp"

namespace hapr {

struct RhoSearch {
  double rho = 0.0;
  double objective = 0.0;
  std::size_t evaluations = 0;
  std::size_t failures = 0;  // points skipped because a fixed point did not converge
};

struct RhoOptions {
  std::size_t grid = 64;
  double tol = 1e-6;
};

/// Overall throughput at a uniform rho for a fixed assignment.
inline double rho_objective(double rho, const Grid<std::uint8_t>& assignment, const RateTable& rates,
                            const SystemConfig& cfg, const MacTimings& t) {
  return case1_sum(rho, assignment, rates, t, cfg).s_sum;
}

/// Maximizes throughput over a uniform rho for a fixed assignment: a grid scan
/// picks the first best point, then golden-section search refines inside the
/// neighbouring cells. `incumbent`, when given, is returned unless beaten.
inline RhoSearch solve_rho(const Grid<std::uint8_t>& assignment, const RateTable& rates, const SystemConfig& cfg,
                           const MacTimings& t, RhoOptions opt = {}, std::optional<double> incumbent = std::nullopt) {
  if (opt.grid < 16) throw Error(ErrorCode::invalid_value, "grid", "rho grid needs at least 16 points");
  if (!(opt.tol > 0.0)) throw Error(ErrorCode::invalid_value, "tol", "tolerance must be > 0");
  detail::check_assignment(assignment, rates);

  RhoSearch out;
  auto eval = [&](double rho) -> std::optional<double> {
    ++out.evaluations;
    try {
      return rho_objective(rho, assignment, rates, cfg, t);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::no_convergence) throw;
      ++out.failures;
      return std::nullopt;
    }
  };

  const double step = 1.0 / static_cast<double>(opt.grid - 1);
  std::optional<std::size_t> best_i;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < opt.grid; ++i) {
    const auto v = eval(static_cast<double>(i) * step);
    if (v && *v > best) {
      best = *v;
      best_i = i;
    }
  }
  if (!best_i) throw Error(ErrorCode::evaluation_failure, "rho", "objective failed at every grid point");
  out.rho = static_cast<double>(*best_i) * step;
  out.objective = best;

  // Golden-section refinement on the bracket around the grid maximum.
  double lo = *best_i == 0 ? 0.0 : out.rho - step;
  double hi = *best_i + 1 == opt.grid ? 1.0 : out.rho + step;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto safe = [&](double x) { return eval(x).value_or(-std::numeric_limits<double>::infinity()); };
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = safe(x1);
  double f2 = safe(x2);
  while (hi - lo > opt.tol) {
    if (f1 >= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = safe(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = safe(x2);
    }
  }
  const double xr = f1 >= f2 ? x1 : x2;
  const double fr = std::max(f1, f2);
  if (fr > out.objective) {
    out.rho = xr;
    out.objective = fr;
  }

  if (incumbent) {
    const auto v = eval(*incumbent);
    if (v && *v >= out.objective && !(*v == out.objective && *incumbent > out.rho)) {
      out.rho = *incumbent;
      out.objective = *v;
    }
  }
  return out;
}

struct TraceEntry {
  std::size_t iteration = 0;
  double rho = 0.0;
  double objective = 0.0;
};

struct OptimizerResult {
  double rho_star = 0.0;
  Grid<std::uint8_t> assignment_star;
  double objective = 0.0;
  std::size_t iterations = 0;
  std::vector<TraceEntry> trace;
  bool converged = false;
  bool stalled = false;           // an alternation step would have lowered the objective
  bool assignment_capped = false; // reservations exceeded the assignable users
  std::size_t reservations = 0;   // whole reservations at rho_star
};

struct AlternateOptions {
  std::size_t max_iters = 50;
  double tol = 1e-6;
  RhoOptions rho{};
};

/// Alternates the HAP-selection step (at the reservation count implied by
/// the current rho) and the rho step (for the chosen assignment), starting
/// from rho = 0.5. Every accepted step is non-decreasing in throughput.
inline OptimizerResult alternate(const SystemConfig& cfg, const MacTimings& t, const RateTable& rates,
                                 AlternateOptions opt = {}) {
  if (opt.max_iters < 1) throw Error(ErrorCode::invalid_value, "max_iters", "need at least one iteration");
  const std::size_t n_users = rates.n_users();
  if (n_users == 0) throw Error(ErrorCode::invalid_count, "n_users", "need at least one user");

  OptimizerResult res;
  double rho = 0.5;
  Grid<std::uint8_t> u(n_users, rates.n_haps(), 0);
  double objective = -std::numeric_limits<double>::infinity();

  for (std::size_t it = 1; it <= opt.max_iters; ++it) {
    const std::size_t n_s = reservation_count(static_cast<double>(n_users) * rho, cfg, t);
    auto step = solve_assignment(n_s, rates, cfg.assignment_mode);
    const auto rs = solve_rho(step.assignment, rates, cfg, t, opt.rho, rho);

    if (rs.objective < objective) {
      res.stalled = true;
      res.converged = true;
      break;
    }
    const bool same_u = step.assignment == u;
    const double delta = std::abs(rs.rho - rho);
    res.trace.push_back({it, rs.rho, rs.objective});
    res.iterations = it;
    res.assignment_capped = step.capped;
    rho = rs.rho;
    u = std::move(step.assignment);
    objective = rs.objective;
    // With no HAPs the assignment is forced, so one rho step is the optimum.
    if ((delta <= opt.tol && same_u) || rates.n_haps() == 0) {
      res.converged = true;
      break;
    }
  }

  for (std::size_t i = 1; i < res.trace.size(); ++i)
    if (res.trace[i].objective < res.trace[i - 1].objective)
      throw std::logic_error("optimizer trace decreased at iteration " + std::to_string(res.trace[i].iteration));

  res.rho_star = rho;
  res.assignment_star = std::move(u);
  res.objective = objective;
  res.reservations = reservation_count(static_cast<double>(n_users) * rho, cfg, t);
  return res;
}

}  // namespace hapr
