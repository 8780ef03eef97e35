#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hapr/hapr.hpp"
#include "hapr/io.hpp"
#include "hapr/sweep.hpp"

namespace {

using namespace hapr;

enum Exit : int { ok = 0, not_converged = 1, bad_input = 2, failure = 3 };

/// Output stream for a path; "-" or empty means stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_) throw Error(ErrorCode::invalid_value, path, "cannot open output file");
  }
  std::ostream& get() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

struct Common {
  std::string config;
  std::string output;
  bool no_timestamp = false;
};

int analyze(const Common& c, std::vector<double> rhos) {
  const Scenario s = materialize(load_config(c.config));
  const auto rates = build_rate_table(s.config);
  Sink sink(c.output);
  CsvWriter w(sink.get(), !c.no_timestamp);
  std::vector<std::string> header{"case"};
  header.insert(header.end(), report_columns().begin(), report_columns().end());
  w.row(header);
  for (double rho : rhos) {
    std::string label = "sum";
    ThroughputReport rep;
    if (rho == 0.0) {
      label = "g2s-only";
      rep = case2_g2s_only(rates, s.timings, s.config);
    } else if (rho == 1.0) {
      label = "gas-only";
      const auto n_s = reservation_count(static_cast<double>(s.config.n_users), s.config, s.timings);
      const auto a = solve_assignment(n_s, rates, s.config.assignment_mode);
      rep = case3_gas_only(a.assignment, rates, s.timings, s.config);
    } else {
      rep = evaluate_uniform(s, rates, rho).report;
    }
    auto cells = report_cells(rep);
    cells.insert(cells.begin(), label);
    w.row(cells);
  }
  return ok;
}

int optimize(const Common& c, std::string decision_path, std::uint64_t seed, std::size_t max_iters, double tol) {
  const Scenario s = materialize(load_config(c.config));
  const auto rates = build_rate_table(s.config);
  AlternateOptions opt;
  opt.max_iters = max_iters;
  opt.tol = tol;
  const auto res = alternate(s.config, s.timings, rates, opt);

  {
    Sink sink(c.output);
    CsvWriter w(sink.get(), !c.no_timestamp);
    w.row({"iteration", "rho", "objective"});
    for (const auto& e : res.trace) w.row({std::to_string(e.iteration), fmt(e.rho), fmt(e.objective)});
  }

  if (decision_path.empty() && !c.output.empty() && c.output != "-") decision_path = c.output + ".decision.csv";
  if (!decision_path.empty()) {
    Decision d{std::vector<double>(s.config.n_users, res.rho_star), res.assignment_star};
    const double n_gas = static_cast<double>(s.config.n_users) * res.rho_star;
    std::optional<ReservationPoint> rp;
    if (n_gas * s.config.q() >= 1.0 - 1e-12) rp = solve_reservation(n_gas, s.config, s.timings);
    const auto fs = execute_schedule(d, rp.value_or(ReservationPoint{}), s.timings, seed);

    Sink sink(decision_path);
    CsvWriter w(sink.get(), !c.no_timestamp);
    w.row({"user", "rho", "hap", "mode", "first_slot", "slot_count"});
    for (std::size_t n = 0; n < s.config.n_users; ++n) {
      const auto hap = d.hap_of(n);
      const auto& plan = fs.users[n];
      std::string mode = plan.mode == LinkMode::g2s ? "g2s" : (plan.reservation ? "gas" : "gas-unreserved");
      std::string first, count;
      if (plan.reservation) {
        first = std::to_string(fs.reservations[*plan.reservation].first_slot);
        count = std::to_string(fs.reservations[*plan.reservation].slot_count);
      }
      w.row({std::to_string(n), fmt(res.rho_star), hap ? std::to_string(*hap) : "", mode, first, count});
    }
  }

  std::cerr << "rho*=" << fmt(res.rho_star) << " objective=" << fmt(res.objective) << " bit/s iterations=" << res.iterations
            << (res.converged ? " converged" : " not converged") << (res.stalled ? " (stalled)" : "")
            << (res.assignment_capped ? " (assignment capped)" : "") << '\n';
  return res.converged ? ok : not_converged;
}

int simulate(const Common& c, std::uint64_t seed, std::uint64_t slots, std::uint64_t frames, std::optional<std::size_t> stations) {
  const Scenario s = materialize(load_config(c.config));
  const std::size_t n = stations.value_or(s.config.n_users);
  const auto sim = simulate_csma(n, s.timings, slots, seed);
  const auto cp = solve_contention(static_cast<double>(n), s.timings);

  Sink sink(c.output);
  CsvWriter w(sink.get(), !c.no_timestamp);
  w.row({"model", "n", "seed", "samples", "quantity", "simulated", "se", "analytic"});
  const std::string ns = std::to_string(n);
  const std::string seeds = std::to_string(seed);
  const std::string samples = std::to_string(sim.slots_simulated);
  auto emit = [&](const std::string& model, const std::string& count, const std::string& smp, const char* q, Estimate e,
                  const std::string& analytic) { w.row({model, count, seeds, smp, q, fmt(e.value), fmt(e.se), analytic}); };
  emit("csma", ns, samples, "tau", sim.est_tau, fmt(cp.tau));
  emit("csma", ns, samples, "p_success", sim.est_ps, fmt(cp.p_success));
  emit("csma", ns, samples, "p_idle", sim.est_pe, fmt(cp.p_idle));
  emit("csma", ns, samples, "p_collision", sim.est_pc, fmt(cp.p_fail));
  emit("csma", ns, samples, "utilization", sim.est_util, fmt(cp.utilization));

  const double q = s.config.q();
  const auto neg = simulate_negotiation(n, q, s.timings, frames, seed);
  std::string analytic;
  if (static_cast<double>(n) * q >= 1.0 - 1e-12) analytic = fmt(solve_reservation(static_cast<double>(n), s.config, s.timings).zeta_s);
  else if (neg.contenders == 0) analytic = fmt(0.0);
  emit("negotiation", ns, std::to_string(neg.frames), "zeta_s", neg.zeta_s, analytic);
  return ok;
}

int sweep(const Common& c, const std::string& spec_path, std::size_t jobs) {
  const auto doc = load_config(c.config);
  const auto spec = parse_sweep(read_file(spec_path));
  const auto rows = run_sweep(doc, spec, jobs);
  Sink sink(!c.output.empty() ? c.output : spec.output_path);
  write_sweep_csv(sink.get(), spec, rows, !c.no_timestamp);
  return ok;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
  sub->add_option("--output", c.output, "Output CSV path, - for stdout");
  sub->add_flag("--no-timestamp", c.no_timestamp, "Omit the generated-at comment line");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HAP-assisted satellite uplink throughput analysis"};
  app.require_subcommand(1);

  Common common;
  auto* an = app.add_subcommand("analyze", "Throughput report per requested rho");
  add_common(an, common);
  std::vector<double> rhos{0.0, 0.5, 1.0};
  an->add_option("--rho", rhos, "Uniform GAS probabilities (repeatable)")->check(CLI::Range(0.0, 1.0));

  auto* op = app.add_subcommand("optimize", "Alternating rho / HAP-selection optimization");
  add_common(op, common);
  std::string decision;
  std::uint64_t seed = 1;
  std::size_t max_iters = 50;
  double tol = 1e-6;
  op->add_option("--decision", decision, "Final decision CSV (default: <output>.decision.csv)");
  op->add_option("--seed", seed, "Seed for the sampled frame schedule");
  op->add_option("--max-iters", max_iters, "Iteration limit")->check(CLI::PositiveNumber);
  op->add_option("--tol", tol, "Convergence tolerance on rho")->check(CLI::PositiveNumber);

  auto* sm = app.add_subcommand("simulate", "Monte Carlo check of the MAC models");
  add_common(sm, common);
  std::uint64_t slots = 1000000;
  std::uint64_t frames = 10000;
  std::optional<std::size_t> stations;
  sm->add_option("--seed", seed, "Random seed");
  sm->add_option("--slots", slots, "Contention slots to simulate")->check(CLI::Range(std::uint64_t{10000}, std::uint64_t{1} << 40));
  sm->add_option("--frames", frames, "Negotiation periods to simulate")->check(CLI::Range(std::uint64_t{100}, std::uint64_t{1} << 40));
  sm->add_option("--stations", stations, "Station count (default: n_users)")->check(CLI::PositiveNumber);

  auto* sw = app.add_subcommand("sweep", "Parameter sweep to CSV");
  add_common(sw, common);
  std::string spec_path;
  std::size_t jobs = 1;
  sw->add_option("--sweep", spec_path, "Sweep spec (JSON)")->required()->check(CLI::ExistingFile);
  sw->add_option("--jobs", jobs, "Concurrent sweep points")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*an) return analyze(common, rhos);
    if (*op) return optimize(common, decision, seed, max_iters, tol);
    if (*sm) return simulate(common, seed, slots, frames, stations);
    if (*sw) return sweep(common, spec_path, jobs);
  } catch (const Error& e) {
    for (const auto& issue : e.issues())
      std::cerr << "error: " << to_string(issue.code) << (issue.field.empty() ? "" : " [" + issue.field + "]") << ": "
                << issue.detail << '\n';
    return bad_input;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return failure;
  }
  return failure;
}
