#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hapr {

enum class ErrorCode {
  invalid_weight,
  empty_population,
  nonpositive_duration,
  invalid_value,
  shape_mismatch,
  row_sum_violation,
  count_violation,
  range_violation,
  invalid_count,
  no_convergence,
  subunit_population,
  nonpositive_input,
  negative_input,
  index_out_of_range,
  stale_contention_point,
  stale_reservation_point,
  constraint_violation,
  evaluation_failure,
  infeasible_count,
  config_parse,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_weight: return "invalid-weight";
    case ErrorCode::empty_population: return "empty-population";
    case ErrorCode::nonpositive_duration: return "nonpositive-duration";
    case ErrorCode::invalid_value: return "invalid-value";
    case ErrorCode::shape_mismatch: return "shape-mismatch";
    case ErrorCode::row_sum_violation: return "row-sum-violation";
    case ErrorCode::count_violation: return "count-violation";
    case ErrorCode::range_violation: return "range-violation";
    case ErrorCode::invalid_count: return "invalid-count";
    case ErrorCode::no_convergence: return "no-convergence";
    case ErrorCode::subunit_population: return "subunit-population";
    case ErrorCode::nonpositive_input: return "nonpositive-input";
    case ErrorCode::negative_input: return "negative-input";
    case ErrorCode::index_out_of_range: return "index-out-of-range";
    case ErrorCode::stale_contention_point: return "stale-contention-point";
    case ErrorCode::stale_reservation_point: return "stale-reservation-point";
    case ErrorCode::constraint_violation: return "constraint-violation";
    case ErrorCode::evaluation_failure: return "evaluation-failure";
    case ErrorCode::infeasible_count: return "infeasible-count";
    case ErrorCode::config_parse: return "config-parse";
  }
  return "unknown";
}

/// One violated invariant: which rule failed and on which field.
struct Issue {
  ErrorCode code;
  std::string field;
  std::string detail;
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string field, const std::string& detail)
      : std::runtime_error(format({code, field, detail})), issues_{{code, std::move(field), detail}} {}

  /// Aggregate error carrying every violated invariant; code() reports the first.
  explicit Error(std::vector<Issue> issues)
      : std::runtime_error(format_all(issues)), issues_(std::move(issues)) {}

  ErrorCode code() const noexcept { return issues_.front().code; }
  const std::string& field() const noexcept { return issues_.front().field; }
  const std::vector<Issue>& issues() const noexcept { return issues_; }

  bool has(ErrorCode c) const noexcept {
    for (const auto& i : issues_)
      if (i.code == c) return true;
    return false;
  }

 private:
  static std::string format(const Issue& i) {
    std::string s{to_string(i.code)};
    if (!i.field.empty()) s += " [" + i.field + "]";
    if (!i.detail.empty()) s += ": " + i.detail;
    return s;
  }
  static std::string format_all(const std::vector<Issue>& issues) {
    std::string s;
    for (const auto& i : issues) {
      if (!s.empty()) s += "; ";
      s += format(i);
    }
    return s;
  }

  std::vector<Issue> issues_;
};

}  // namespace hapr
