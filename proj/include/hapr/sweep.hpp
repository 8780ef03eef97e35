#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "hapr/assignment.hpp"
#include "hapr/error.hpp"
#include "hapr/io.hpp"
#include "hapr/model.hpp"
#include "hapr/optimizer.hpp"
#include "hapr/phy.hpp"
#include "hapr/throughput.hpp"

namespace hapr {

struct PointResult {
  ThroughputReport report;
  AssignmentResult assignment;
};

/// Throughput at a uniform rho with the assignment chosen for the
/// reservation count at that rho.
inline PointResult evaluate_uniform(const Scenario& s, const RateTable& rates, double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw Error(ErrorCode::range_violation, "rho", "rho outside [0,1]");
  const auto n_s = reservation_count(static_cast<double>(rates.n_users()) * rho, s.config, s.timings);
  auto a = solve_assignment(n_s, rates, s.config.assignment_mode);
  auto rep = case1_sum(rho, a.assignment, rates, s.timings, s.config);
  return {rep, std::move(a)};
}

struct SweepAxis {
  std::string variable;
  std::vector<double> values;
};

struct SweepSpec {
  SweepAxis axis;
  std::optional<SweepAxis> curve;
  nlohmann::json fixed_overrides = nlohmann::json::object();
  std::string output_path;
};

namespace detail {

inline SweepAxis parse_axis(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("variable") || !j.contains("values"))
    throw Error(ErrorCode::config_parse, where, "needs \"variable\" and \"values\"");
  SweepAxis a;
  a.variable = get_as<std::string>(j["variable"], where + ".variable");
  if (a.variable == "t_h") a.variable = "negotiation_s";
  a.values = get_numbers(j["values"], where + ".values");
  if (a.values.empty()) throw Error(ErrorCode::config_parse, where + ".values", "must not be empty");
  for (std::size_t i = 1; i < a.values.size(); ++i)
    if (!(a.values[i] > a.values[i - 1])) throw Error(ErrorCode::config_parse, where + ".values", "must be strictly increasing");
  // Reject names that are neither rho nor a config key before any work is done.
  if (a.variable != "rho") {
    ConfigDocument probe;
    apply_setting(probe, a.variable, nlohmann::json(a.values.front()));
  }
  return a;
}

}  // namespace detail

inline SweepSpec parse_sweep(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::config_parse, "line " + std::to_string(detail::line_of(text, e.byte)), e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::config_parse, "", "sweep spec must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (key != "variable" && key != "values" && key != "curve" && key != "fixed_overrides" && key != "output_path")
      throw Error(ErrorCode::config_parse, key, "unknown sweep key");
  SweepSpec s;
  s.axis = detail::parse_axis(j, "sweep");
  if (j.contains("curve")) {
    s.curve = detail::parse_axis(j["curve"], "curve");
    if (s.curve->variable == s.axis.variable)
      throw Error(ErrorCode::config_parse, "curve.variable", "curve and sweep variables must differ");
  }
  if (j.contains("fixed_overrides")) {
    if (!j["fixed_overrides"].is_object()) throw Error(ErrorCode::config_parse, "fixed_overrides", "expected an object");
    s.fixed_overrides = j["fixed_overrides"];
  }
  if (j.contains("output_path")) s.output_path = detail::get_as<std::string>(j["output_path"], "output_path");
  return s;
}

struct SweepRow {
  double value = 0.0;
  std::optional<double> curve_value;
  ThroughputReport report;
};

/// One point of a sweep. rho comes from the sweep or curve axis, else from
/// fixed_overrides["rho"]; "optimal" or no rho at all runs the optimizer.
inline ThroughputReport run_sweep_point(const ConfigDocument& base, const SweepSpec& spec, double value,
                                        std::optional<double> curve_value) {
  ConfigDocument doc = base;
  std::optional<double> rho;
  bool optimize = true;
  for (const auto& [key, v] : spec.fixed_overrides.items()) {
    if (key == "rho") {
      if (v.is_string() && v.get<std::string>() == "optimal") continue;
      rho = detail::get_number(v, "fixed_overrides.rho");
      continue;
    }
    apply_setting(doc, key, v);
  }
  auto set = [&](const std::string& var, double x) {
    if (var == "rho")
      rho = x;
    else
      apply_setting(doc, var, nlohmann::json(x));
  };
  set(spec.axis.variable, value);
  if (spec.curve && curve_value) set(spec.curve->variable, *curve_value);
  if (rho) optimize = false;

  const Scenario s = materialize(doc);
  const auto rates = build_rate_table(s.config);
  if (!optimize) return evaluate_uniform(s, rates, *rho).report;
  const auto opt = alternate(s.config, s.timings, rates);
  return case1_sum(opt.rho_star, opt.assignment_star, rates, s.timings, s.config);
}

/// Evaluates every (value, curve) pair, up to `jobs` at a time. Rows come
/// back in sweep order, curve-major within each value.
inline std::vector<SweepRow> run_sweep(const ConfigDocument& base, const SweepSpec& spec, std::size_t jobs = 1) {
  std::vector<SweepRow> rows;
  for (double v : spec.axis.values) {
    if (spec.curve)
      for (double c : spec.curve->values) rows.push_back({v, c, {}});
    else
      rows.push_back({v, std::nullopt, {}});
  }

  std::vector<std::exception_ptr> errors(rows.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      try {
        rows[i].report = run_sweep_point(base, spec, rows[i].value, rows[i].curve_value);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  jobs = std::max<std::size_t>(1, std::min(jobs, rows.size()));
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

inline void write_sweep_csv(std::ostream& out, const SweepSpec& spec, const std::vector<SweepRow>& rows, bool timestamp) {
  CsvWriter w(out, timestamp);
  std::vector<std::string> header{"sweep_variable", "sweep_value", "curve_variable", "curve_value"};
  const auto& cols = report_columns();
  header.insert(header.end(), cols.begin(), cols.end());
  w.row(header);
  for (const auto& r : rows) {
    std::vector<std::string> cells{spec.axis.variable, fmt(r.value), spec.curve ? spec.curve->variable : "",
                                   r.curve_value ? fmt(*r.curve_value) : ""};
    const auto rep = report_cells(r.report);
    cells.insert(cells.end(), rep.begin(), rep.end());
    w.row(cells);
  }
}

}  // namespace hapr
