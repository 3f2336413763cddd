#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hydrostat/errors.hpp"
#include "hydrostat/solvers.hpp"

namespace hydrostat {

enum class SweepMode { eps_delta_to_zero, delta_to_infty, gamma_scan };

inline const char* to_string(SweepMode m) {
  switch (m) {
    case SweepMode::eps_delta_to_zero: return "eps_delta_to_zero";
    case SweepMode::delta_to_infty: return "delta_to_infty";
    case SweepMode::gamma_scan: return "gamma_scan";
  }
  return "unknown";
}

inline SweepMode sweep_mode_from_string(const std::string& s) {
  for (SweepMode m : {SweepMode::eps_delta_to_zero, SweepMode::delta_to_infty, SweepMode::gamma_scan})
    if (s == to_string(m)) return m;
  throw ConfigError("unknown sweep mode '" + s + "'");
}

/// Parameters of a single run or a sweep. Single runs use `sim` only.
struct SweepConfig {
  SweepMode mode = SweepMode::eps_delta_to_zero;
  SimConfig sim;
  std::vector<double> eps_values;
  std::vector<double> delta_values;
  std::vector<double> gamma_values;
  int threads = 1;
  bool record_timing = false;

  void validate_sweep() const {
    sim.validate();
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (eps_values.empty()) throw ConfigError("eps_values must not be empty");
    for (double e : eps_values)
      if (!(e > 0.0)) throw ConfigError("eps values must be > 0");
    for (double d : delta_values)
      if (!(d >= 0.0)) throw ConfigError("delta values must be >= 0");
    switch (mode) {
      case SweepMode::eps_delta_to_zero:
        if (!delta_values.empty() && delta_values.size() != eps_values.size())
          throw ConfigError("eps_delta_to_zero pairs eps_values with delta_values; lengths differ");
        break;
      case SweepMode::delta_to_infty:
        if (delta_values.empty()) throw ConfigError("delta_values must not be empty");
        break;
      case SweepMode::gamma_scan:
        if (gamma_values.empty()) throw ConfigError("gamma_values must not be empty");
        for (double g : gamma_values)
          if (!(g > 0.0)) throw ConfigError("gamma values must be > 0");
        break;
    }
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw ConfigError("");
    return d;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  }
}

inline long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long d = std::stoll(v, &pos);
    if (pos != v.size()) throw ConfigError("");
    return d;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  }
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(key, item));
  }
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + v + "'");
}

}  // namespace detail

/// Flat `key = value` text; `#` starts a comment. Unknown keys are errors.
inline SweepConfig parse_config(const std::string& text) {
  SweepConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    SimConfig& s = cfg.sim;
    try {
      if (key == "mode") cfg.mode = sweep_mode_from_string(val);
      else if (key == "system") s.system = system_from_string(val);
      else if (key == "nx") s.nx = static_cast<int>(detail::parse_int(key, val));
      else if (key == "ny") s.ny = static_cast<int>(detail::parse_int(key, val));
      else if (key == "nz") s.nz = static_cast<int>(detail::parse_int(key, val));
      else if (key == "eps") s.eps = detail::parse_double(key, val);
      else if (key == "delta") s.delta = detail::parse_double(key, val);
      else if (key == "gamma") s.gamma = detail::parse_double(key, val);
      else if (key == "dt") s.dt = detail::parse_double(key, val);
      else if (key == "T") s.T = detail::parse_double(key, val);
      else if (key == "recipe") s.recipe = val;
      else if (key == "seed") s.seed = static_cast<std::uint64_t>(detail::parse_int(key, val));
      else if (key == "record_every") s.record_every = static_cast<int>(detail::parse_int(key, val));
      else if (key == "baroclinic_scale") s.baroclinic_scale = detail::parse_double(key, val);
      else if (key == "eps_values") cfg.eps_values = detail::parse_list(key, val);
      else if (key == "delta_values") cfg.delta_values = detail::parse_list(key, val);
      else if (key == "gamma_values") cfg.gamma_values = detail::parse_list(key, val);
      else if (key == "threads") cfg.threads = static_cast<int>(detail::parse_int(key, val));
      else if (key == "record_timing") cfg.record_timing = detail::parse_bool(key, val);
      else throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    } catch (const InvalidParameter& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  const auto& recipes = initial_data_recipes();
  if (std::find(recipes.begin(), recipes.end(), cfg.sim.recipe) == recipes.end())
    throw ConfigError("unknown recipe '" + cfg.sim.recipe + "'");
  return cfg;
}

inline SweepConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace hydrostat
