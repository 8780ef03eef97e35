#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iterator>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hapr/error.hpp"
#include "hapr/model.hpp"
#include "hapr/phy.hpp"
#include "hapr/throughput.hpp"

namespace hapr {

/// A parsed config file. Positions or losses may be omitted, in which case a
/// disc layout is generated for the current user and HAP counts.
struct ConfigDocument {
  SystemConfig config;
  MacTimings timings;
  DiscLayout layout;
};

/// Fills in generated geometry when needed and validates.
inline Scenario materialize(const ConfigDocument& doc) {
  SystemConfig cfg = doc.config;
  if (!cfg.losses && !cfg.geometry) cfg.geometry = make_disc_geometry(cfg.n_users, cfg.n_haps, doc.layout);
  return validate_config(cfg, doc.timings);
}

namespace detail {

using json = nlohmann::json;

inline std::size_t line_of(std::string_view text, std::size_t byte) {
  const auto end = text.begin() + static_cast<std::ptrdiff_t>(std::min(byte, text.size()));
  return 1 + static_cast<std::size_t>(std::count(text.begin(), end, '\n'));
}

[[noreturn]] inline void parse_fail(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::config_parse, field, what);
}

template <typename T>
T get_as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception& e) {
    parse_fail(key, std::string("wrong type: ") + e.what());
  }
}

inline double get_number(const json& v, const std::string& key) {
  if (!v.is_number()) parse_fail(key, "expected a number");
  return v.get<double>();
}

inline std::size_t get_count(const json& v, const std::string& key) {
  if (!v.is_number_integer() && !(v.is_number() && v.get<double>() == std::floor(v.get<double>())))
    parse_fail(key, "expected a non-negative integer");
  const double d = v.get<double>();
  if (d < 0) parse_fail(key, "expected a non-negative integer");
  return static_cast<std::size_t>(d);
}

inline Vec3 get_vec3(const json& v, const std::string& key) {
  if (!v.is_array() || v.size() != 3) parse_fail(key, "expected [x, y, z]");
  return {get_number(v[0], key), get_number(v[1], key), get_number(v[2], key)};
}

inline std::vector<double> get_numbers(const json& v, const std::string& key) {
  if (!v.is_array()) parse_fail(key, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(get_number(x, key));
  return out;
}

inline G2sUtilization parse_utilization(const std::string& s) {
  if (s == "per-station") return G2sUtilization::per_station;
  if (s == "aggregate") return G2sUtilization::aggregate;
  parse_fail("g2s_utilization", "expected per-station or aggregate, got " + s);
}

inline AssignmentMode parse_mode(const std::string& s) {
  if (s == "exhaustive") return AssignmentMode::exhaustive;
  if (s == "per-user-best") return AssignmentMode::per_user_best;
  if (s == "one-per-hap") return AssignmentMode::one_per_hap;
  parse_fail("assignment_mode", "expected exhaustive, per-user-best or one-per-hap, got " + s);
}

}  // namespace detail

/// Applies one key to a document. Shared by file loading and sweep overrides.
inline void apply_setting(ConfigDocument& doc, const std::string& key, const nlohmann::json& v) {
  using namespace detail;
  auto& c = doc.config;
  auto& t = doc.timings;
  auto& l = doc.layout;
  auto num = [&](double& dst) { dst = get_number(v, key); };

  if (key == "n_users") c.n_users = get_count(v, key);
  else if (key == "n_haps") c.n_haps = get_count(v, key);
  else if (key == "n_subchannels") c.n_subchannels = get_count(v, key);
  else if (key == "bandwidth_hz") num(c.bandwidth_hz);
  else if (key == "w1") num(c.w1);
  else if (key == "w2") num(c.w2);
  else if (key == "tx_power_g2s_w") num(c.tx_power_g2s_w);
  else if (key == "tx_power_gas_user_w") num(c.tx_power_gas_user_w);
  else if (key == "tx_power_hap_w") num(c.tx_power_hap_w);
  else if (key == "noise_g2s_w") num(c.noise_g2s_w);
  else if (key == "noise_gu_hap_w") num(c.noise_gu_hap_w);
  else if (key == "noise_hap_sat_w") num(c.noise_hap_sat_w);
  else if (key == "arrival_rate") num(c.arrival_rate);
  else if (key == "service_rate") num(c.service_rate);
  else if (key == "g2s_utilization") c.g2s_utilization = parse_utilization(get_as<std::string>(v, key));
  else if (key == "assignment_mode") c.assignment_mode = parse_mode(get_as<std::string>(v, key));
  else if (key == "slot_s") num(t.slot_s);
  else if (key == "sifs_s") num(t.sifs_s);
  else if (key == "difs_s") num(t.difs_s);
  else if (key == "rts_s") num(t.rts_s);
  else if (key == "cts_s") num(t.cts_s);
  else if (key == "payload_s") num(t.payload_s);
  else if (key == "frame_s") num(t.frame_s);
  else if (key == "negotiation_s" || key == "t_h") num(t.negotiation_s);
  else if (key == "w_min") t.w_min = static_cast<std::uint32_t>(get_count(v, key));
  else if (key == "backoff_stages") t.backoff_stages = static_cast<std::uint32_t>(get_count(v, key));
  else if (key == "control_rate_bps") {
    const double r = get_number(v, key);
    if (!(r > 0.0)) parse_fail(key, "must be > 0");
    t.set_control_rate(r);
  } else if (key == "disc_radius_m") num(l.disc_radius_m);
  else if (key == "hap_altitude_m") num(l.hap_altitude_m);
  else if (key == "hap_ring_radius_m") num(l.hap_ring_radius_m);
  else if (key == "satellite_altitude_m") num(l.satellite_altitude_m);
  else if (key == "carrier_freq_hz") {
    num(l.carrier_freq_hz);
    if (c.geometry) c.geometry->carrier_freq_hz = l.carrier_freq_hz;
  } else if (key == "layout_seed") l.seed = get_count(v, key);
  else if (key == "user_positions" || key == "hap_positions" || key == "satellite_position") {
    if (!c.geometry) {
      c.geometry = Geometry{};
      c.geometry->carrier_freq_hz = l.carrier_freq_hz;
      c.geometry->satellite_position = {0.0, 0.0, l.satellite_altitude_m};
    }
    auto& g = *c.geometry;
    if (key == "satellite_position") {
      g.satellite_position = get_vec3(v, key);
    } else {
      if (!v.is_array()) parse_fail(key, "expected an array of [x, y, z]");
      auto& dst = key == "user_positions" ? g.user_positions : g.hap_positions;
      dst.clear();
      for (const auto& p : v) dst.push_back(get_vec3(p, key));
    }
  } else if (key == "loss_g2s_db" || key == "loss_gu_hap_db" || key == "loss_hap_sat_db") {
    if (!c.losses) c.losses = LinkBudget{};
    auto& b = *c.losses;
    if (key == "loss_g2s_db") {
      b.loss_g2s_db = get_numbers(v, key);
    } else if (key == "loss_hap_sat_db") {
      b.loss_hap_sat_db = get_numbers(v, key);
    } else {
      if (!v.is_array()) parse_fail(key, "expected an N x K array");
      const std::size_t rows = v.size();
      const std::size_t cols = rows ? (v[0].is_array() ? v[0].size() : 0) : 0;
      Grid<double> g(rows, cols);
      for (std::size_t r = 0; r < rows; ++r) {
        const auto row = get_numbers(v[r], key);
        if (row.size() != cols) parse_fail(key, "ragged rows");
        for (std::size_t k = 0; k < cols; ++k) g(r, k) = row[k];
      }
      b.loss_gu_hap_db = std::move(g);
    }
  } else {
    parse_fail(key, "unknown key");
  }
}

inline ConfigDocument parse_config(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::config_parse, "line " + std::to_string(detail::line_of(text, e.byte)), e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::config_parse, "", "config must be a JSON object");
  ConfigDocument doc;
  // Counts first so later keys see them; everything else in file order.
  for (const char* key : {"n_users", "n_haps"})
    if (j.contains(key)) apply_setting(doc, key, j[key]);
  for (const auto& [key, value] : j.items()) {
    if (key == "n_users" || key == "n_haps") continue;
    apply_setting(doc, key, value);
  }
  return doc;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::config_parse, path, "cannot open file");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline ConfigDocument load_config(const std::string& path) { return parse_config(read_file(path)); }

// ---------------------------------------------------------------- CSV

/// %.9g formatting for every floating-point cell.
inline std::string fmt(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.9g", v);
  return buf.data();
}

inline std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out, bool timestamp = false) : out_(out) {
    if (timestamp) {
      const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
      std::array<char, 32> buf{};
      std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
      out_ << "# generated " << buf.data() << '\n';
    }
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << csv_escape(cells[i]);
    }
    out_ << '\n';
  }

 private:
  std::ostream& out_;
};

inline const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> cols{"N", "rho", "s_g2s", "s_gas", "s_sum", "normalized", "alpha", "beta", "n1", "n2"};
  return cols;
}

inline std::vector<std::string> report_cells(const ThroughputReport& r) {
  return {std::to_string(r.n_users), fmt(r.rho),   fmt(r.s_g2s), fmt(r.s_gas), fmt(r.s_sum),
          fmt(r.normalized),        fmt(r.alpha), fmt(r.beta),  fmt(r.n1),    fmt(r.n2)};
}

/// Link budget as CSV: kind,user,hap,loss_db with 6 decimals.
inline void write_link_budget(std::ostream& out, const LinkBudget& b) {
  CsvWriter w(out);
  w.row({"kind", "user", "hap", "loss_db"});
  auto six = [](double v) {
    std::array<char, 40> buf{};
    std::snprintf(buf.data(), buf.size(), "%.6f", v);
    return std::string(buf.data());
  };
  for (std::size_t n = 0; n < b.loss_g2s_db.size(); ++n) w.row({"g2s", std::to_string(n), "", six(b.loss_g2s_db[n])});
  for (std::size_t n = 0; n < b.loss_gu_hap_db.rows(); ++n)
    for (std::size_t k = 0; k < b.loss_gu_hap_db.cols(); ++k)
      w.row({"gu_hap", std::to_string(n), std::to_string(k), six(b.loss_gu_hap_db(n, k))});
  for (std::size_t k = 0; k < b.loss_hap_sat_db.size(); ++k) w.row({"hap_sat", "", std::to_string(k), six(b.loss_hap_sat_db[k])});
}

}  // namespace hapr
