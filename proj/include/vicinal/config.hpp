#pragma once

// Run configuration: `key = value` lines, `#` comments, unknown and
// duplicate keys rejected. Numeric constraints of the owning modules are
// re-checked at parse time so a bad file fails before any work starts.

#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "vicinal/field.hpp"
#include "vicinal/stepper.hpp"

namespace vicinal {

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& key, const std::string& reason)
      : Error("config line " + std::to_string(line) + ", key '" + key +
              "': " + reason),
        line_number(line),
        key_name(key) {}
  int line_number;
  std::string key_name;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& constraint)
      : Error("config validation: " + constraint) {}
};

struct InitSpec {
  enum class Kind { Zero, Sine, Multi };
  Kind kind = Kind::Zero;
  int k = 0;
  double amp = 0.0;
  std::vector<std::tuple<int, double, double>> modes;  // (k, sin amp, cos amp)
};

struct RunConfig {
  int n = 0;
  double a = 0.0;
  double tau = 0.0;
  double t_final = 0.0;
  InitSpec init;
  double newton_tol = 1e-10;
  int max_iter = 60;
  double delta_min = 1e-8;
  int snapshot_every = 1;
  std::string output_dir = "out";
  int battery_max_k = 4;
  int battery_m_time = 2;

  StepConfig step_config() const {
    StepConfig cfg{tau};
    cfg.newton_tol = newton_tol;
    cfg.max_iter = max_iter;
    cfg.delta_min = delta_min;
    return cfg;
  }

  SpectralField build_initial(const PeriodicGrid& grid) const {
    std::vector<std::complex<double>> c(grid.size() / 2 + 1, {0.0, 0.0});
    if (init.kind == InitSpec::Kind::Sine) {
      c[init.k] = std::complex<double>(0.0, -0.5) * init.amp;
    } else if (init.kind == InitSpec::Kind::Multi) {
      for (const auto& [k, s, co] : init.modes)
        c[k] += std::complex<double>(0.5 * co, -0.5 * s);
    }
    return SpectralField::from_coeffs(grid, std::move(c));
  }

  void validate() const {
    if (n < 8 || n % 2 != 0) throw ValidationError("n must be even and >= 8");
    if (!(a > 1e-8)) throw ValidationError("a must be positive (> 1e-8)");
    if (!(tau > 0.0)) throw ValidationError("tau must be positive");
    if (!(tau <= 1.0)) throw ValidationError("tau must be <= 1");
    if (!(t_final > 0.0)) throw ValidationError("t_final must be positive");
    if (!(newton_tol > 0.0)) throw ValidationError("newton_tol must be positive");
    if (max_iter < 1) throw ValidationError("max_iter must be >= 1");
    if (!(delta_min > 0.0)) throw ValidationError("delta_min must be positive");
    if (snapshot_every < 1) throw ValidationError("snapshot_every must be >= 1");
    if (battery_max_k < 1 || battery_max_k > n / 4)
      throw ValidationError("battery_max_k must lie in [1, n/4]");
    if (battery_m_time < 1) throw ValidationError("battery_m_time must be >= 1");
    auto check_mode = [&](int k) {
      if (k < 1 || k >= n / 2)
        throw ValidationError("init mode k must lie in [1, n/2 - 1]");
    };
    if (init.kind == InitSpec::Kind::Sine) check_mode(init.k);
    if (init.kind == InitSpec::Kind::Multi) {
      if (init.modes.empty()) throw ValidationError("init multi needs modes");
      for (const auto& [k, s, co] : init.modes) {
        check_mode(k);
        (void)s;
        (void)co;
      }
    }
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& v, int line, const std::string& key) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw ParseError(line, key, "expected a number, got '" + v + "'");
  return x;
}

inline int parse_int(const std::string& v, int line, const std::string& key) {
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    throw ParseError(line, key, "expected an integer, got '" + v + "'");
  return static_cast<int>(x);
}

inline InitSpec parse_init(const std::string& v, int line) {
  std::istringstream in(v);
  std::string kind;
  in >> kind;
  InitSpec spec;
  if (kind == "zero") {
    std::string extra;
    if (in >> extra) throw ParseError(line, "init", "zero takes no arguments");
    spec.kind = InitSpec::Kind::Zero;
    return spec;
  }
  if (kind == "sine") {
    std::string ks, as, extra;
    if (!(in >> ks >> as)) throw ParseError(line, "init", "sine needs: sine <k> <amp>");
    if (in >> extra) throw ParseError(line, "init", "sine takes exactly two arguments");
    spec.kind = InitSpec::Kind::Sine;
    spec.k = parse_int(ks, line, "init");
    spec.amp = parse_double(as, line, "init");
    return spec;
  }
  if (kind == "multi") {
    std::string rest;
    std::getline(in, rest);
    spec.kind = InitSpec::Kind::Multi;
    std::istringstream items(rest);
    std::string item;
    while (std::getline(items, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      const auto c1 = item.find(':');
      const auto c2 = item.find(':', c1 == std::string::npos ? c1 : c1 + 1);
      if (c1 == std::string::npos || c2 == std::string::npos)
        throw ParseError(line, "init", "multi entries are k:sin_amp:cos_amp");
      spec.modes.emplace_back(parse_int(trim(item.substr(0, c1)), line, "init"),
                              parse_double(trim(item.substr(c1 + 1, c2 - c1 - 1)), line, "init"),
                              parse_double(trim(item.substr(c2 + 1)), line, "init"));
    }
    if (spec.modes.empty()) throw ParseError(line, "init", "multi needs k:s:c entries");
    return spec;
  }
  throw ParseError(line, "init", "unknown preset '" + kind + "' (zero|sine|multi)");
}

inline void apply_key(RunConfig& cfg, const std::string& key, const std::string& value,
                      int line) {
  if (key == "n") cfg.n = parse_int(value, line, key);
  else if (key == "a") cfg.a = parse_double(value, line, key);
  else if (key == "tau") cfg.tau = parse_double(value, line, key);
  else if (key == "t_final") cfg.t_final = parse_double(value, line, key);
  else if (key == "init") cfg.init = parse_init(value, line);
  else if (key == "newton_tol") cfg.newton_tol = parse_double(value, line, key);
  else if (key == "max_iter") cfg.max_iter = parse_int(value, line, key);
  else if (key == "delta_min") cfg.delta_min = parse_double(value, line, key);
  else if (key == "snapshot_every") cfg.snapshot_every = parse_int(value, line, key);
  else if (key == "output_dir") cfg.output_dir = value;
  else if (key == "battery_max_k") cfg.battery_max_k = parse_int(value, line, key);
  else if (key == "battery_m_time") cfg.battery_m_time = parse_int(value, line, key);
  else throw ParseError(line, key, "unknown key");
}

}  // namespace detail

/// Parses and fully validates a configuration text.
inline RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string s = detail::trim(raw);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ParseError(line, "", "expected 'key = value'");
    const std::string key = detail::trim(s.substr(0, eq));
    const std::string value = detail::trim(s.substr(eq + 1));
    if (key.empty()) throw ParseError(line, "", "empty key");
    if (value.empty()) throw ParseError(line, key, "empty value");
    if (!seen.insert(key).second) throw ParseError(line, key, "duplicate key");
    detail::apply_key(cfg, key, value, line);
  }
  for (const char* req : {"n", "a", "tau", "t_final", "init"})
    if (!seen.count(req))
      throw ValidationError(std::string("missing required key '") + req + "'");
  cfg.validate();
  return cfg;
}

/// Applies a single `key=value` override on top of a parsed config.
inline void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ParseError(0, assignment, "override must be key=value");
  detail::apply_key(cfg, detail::trim(assignment.substr(0, eq)),
                    detail::trim(assignment.substr(eq + 1)), 0);
}

}  // namespace vicinal
