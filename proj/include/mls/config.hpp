#pragma once
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mls/vec3.hpp"

namespace mls {

// Plain-text run configuration: `key = value` lines with optional [section]
// headers that group keys cosmetically (key names are globally unique).
// Unknown keys and sections are rejected; parse errors carry line numbers.
struct RunConfig {
  // [profile]
  double radius = 1.0;
  double amplitude = 1.0;
  // [physics]
  double m = 1.0;
  double I = 1.0;
  // [grid]
  int N = 64;
  double L = 16.0;
  double K = 4.0;
  // [experiment]
  Vec3 v{0.0, 0.0, 0.0};
  Vec3 omega{0.0, 0.0, 0.0};
  double eps = 1e-2;
  double T = 20.0;
  double dt = 0.0;  // 0 = automatic (the CFL bound for the configured speed)
  std::uint64_t seed = 1;
  int record_every = 1;
  std::vector<int> resolutions{16, 32, 64};
  std::string sweep_parameter = "v";  // one of: v, omega, eps
  std::vector<double> sweep_values{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};

  double grid_spacing() const { return 2.0 * L / N; }
  double cfl_bound() const;  // 0.5 h / (1 + |v|)

  bool operator==(const RunConfig&) const = default;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed text; `line` is 1-based.
struct ConfigParseError : ConfigError {
  ConfigParseError(int line_no, const std::string& message);
  int line;
};

// Well-formed text violating an invariant; the message names it.
struct ConfigValidationError : ConfigError {
  using ConfigError::ConfigError;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::string& path);

// Throws ConfigValidationError on the first violated invariant.
void validate_config(const RunConfig& cfg);

// Canonical serialization: fixed section and key order, lossless doubles.
// parse_config_text(emit_canonical(c)) == c for any valid c.
std::string emit_canonical(const RunConfig& cfg);

}  // namespace mls
