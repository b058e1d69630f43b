#pragma once

#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace bpfd {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace detail

/// INI-style key-value file: [section] headers, key = value lines, comments
/// with '#' or ';'. Keys are reported as "section.key".
struct ConfigFile {
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) > 0; }

  std::string get_string(const std::string& key,
                         std::optional<std::string> fallback = {}) const {
    auto it = values.find(key);
    if (it != values.end()) return it->second;
    if (fallback) return *fallback;
    throw ConfigError("missing config key: " + key);
  }

  double get_double(const std::string& key,
                    std::optional<double> fallback = {}) const {
    auto it = values.find(key);
    if (it == values.end()) {
      if (fallback) return *fallback;
      throw ConfigError("missing config key: " + key);
    }
    try {
      size_t pos = 0;
      double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + ": not a number: '" +
                        it->second + "'");
    }
  }

  int get_int(const std::string& key, std::optional<int> fallback = {}) const {
    auto it = values.find(key);
    if (it == values.end()) {
      if (fallback) return *fallback;
      throw ConfigError("missing config key: " + key);
    }
    try {
      size_t pos = 0;
      int v = std::stoi(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + ": not an integer: '" +
                        it->second + "'");
    }
  }

  bool get_bool(const std::string& key,
                std::optional<bool> fallback = {}) const {
    auto it = values.find(key);
    if (it == values.end()) {
      if (fallback) return *fallback;
      throw ConfigError("missing config key: " + key);
    }
    std::string v = it->second;
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config key " + key + ": not a boolean: '" + v + "'");
  }
};

inline ConfigFile parse_config_text(const std::string& text) {
  ConfigFile cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t cpos = line.find_first_of("#;");
    if (cpos != std::string::npos) line = line.substr(0, cpos);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) +
                          ": malformed section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError("line " + std::to_string(lineno) +
                          ": empty section name");
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected key = value");
    std::string key = detail::trim(line.substr(0, eq));
    std::string val = detail::trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    std::string full = section.empty() ? key : section + "." + key;
    if (cfg.values.count(full))
      throw ConfigError("duplicate config key: " + full);
    cfg.values[full] = val;
  }
  return cfg;
}

inline ConfigFile load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

/// The recognized schema. Unknown keys are rejected; enumerated values are
/// validated here so every command shares the rules.
inline const std::set<std::string>& config_schema() {
  static const std::set<std::string> keys = {
      "problem.kind",      // allen_cahn | convection_diffusion | vorticity
      "problem.T",
      "grid.nx", "grid.ny",
      "grid.x0", "grid.x1", "grid.y0", "grid.y1",
      "grid.bc",           // dirichlet | periodic
      "scheme.order",      // 2 | 4
      "time.method",       // backward_euler | imex1 | imex_bdf3
      "time.dt",           // number, or a rule: h/6, h/7, dmp
      "time.S",
      "model.energy",      // null | polynomial | logarithmic
      "model.epsilon", "model.theta", "model.theta_c",
      "model.mu",
      "model.linear_well",
      "velocity.kind",     // zero | sin_diag | coupled
      "init.kind",         // zero | sin_product | shear_layer | taylor_green
      "init.amplitude",
      "init.rho", "init.delta",
      "output.dir",
      "output.snapshot_every",
      "output.telemetry",
      "monitor.dmp", "monitor.bounds",
  };
  return keys;
}

inline void validate_schema(const ConfigFile& cfg) {
  const auto& schema = config_schema();
  for (const auto& [k, v] : cfg.values)
    if (!schema.count(k)) throw ConfigError("unknown config key: " + k);
  auto check_enum = [&](const std::string& key,
                        std::initializer_list<const char*> allowed) {
    if (!cfg.has(key)) return;
    std::string v = cfg.values.at(key);
    for (const char* a : allowed)
      if (v == a) return;
    std::string msg = "config key " + key + ": invalid value '" + v +
                      "', expected one of {";
    bool first = true;
    for (const char* a : allowed) {
      if (!first) msg += ", ";
      msg += a;
      first = false;
    }
    throw ConfigError(msg + "}");
  };
  check_enum("problem.kind",
             {"allen_cahn", "convection_diffusion", "vorticity"});
  check_enum("grid.bc", {"dirichlet", "periodic"});
  check_enum("scheme.order", {"2", "4"});
  check_enum("time.method", {"backward_euler", "imex1", "imex_bdf3"});
  check_enum("model.energy", {"null", "polynomial", "logarithmic"});
  check_enum("velocity.kind", {"zero", "sin_diag", "coupled"});
  check_enum("init.kind",
             {"zero", "sin_product", "shear_layer", "taylor_green"});
}

}  // namespace bpfd
