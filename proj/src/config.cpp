#include "mls/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mls/soliton.hpp"

namespace mls {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_double(const std::string& s, int line, const std::string& key) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw ConfigParseError(line, "key '" + key + "': expected a number, got '" + s + "'");
  return v;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

Vec3 parse_vec3(const std::string& s, int line, const std::string& key) {
  const auto toks = split_ws(s);
  if (toks.size() != 3)
    throw ConfigParseError(line, "key '" + key + "': expected three numbers, got '" + s + "'");
  return Vec3{parse_double(toks[0], line, key), parse_double(toks[1], line, key),
              parse_double(toks[2], line, key)};
}

long parse_int(const std::string& s, int line, const std::string& key) {
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0')
    throw ConfigParseError(line, "key '" + key + "': expected an integer, got '" + s + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& s, int line, const std::string& key) {
  if (!s.empty() && s[0] == '-')
    throw ConfigParseError(line, "key '" + key + "': expected a nonnegative integer");
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0')
    throw ConfigParseError(line, "key '" + key + "': expected an integer, got '" + s + "'");
  return v;
}

const char* kSections[] = {"profile", "physics", "grid", "experiment"};

}  // namespace

ConfigParseError::ConfigParseError(int line_no, const std::string& message)
    : ConfigError("config line " + std::to_string(line_no) + ": " + message), line(line_no) {}

double RunConfig::cfl_bound() const { return 0.5 * grid_spacing() / (1.0 + norm(v)); }

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::vector<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigParseError(line, "unterminated section header '" + s + "'");
      const std::string name = trim(s.substr(1, s.size() - 2));
      bool known = false;
      for (const char* sec : kSections) known = known || name == sec;
      if (!known) throw ConfigParseError(line, "unknown section '" + name + "'");
      continue;  // sections are organizational; keys are globally unique
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) throw ConfigParseError(line, "expected 'key = value', got '" + s + "'");
    const std::string key = trim(s.substr(0, eq));
    const std::string val = trim(s.substr(eq + 1));
    if (key.empty()) throw ConfigParseError(line, "empty key");
    if (val.empty()) throw ConfigParseError(line, "key '" + key + "': empty value");
    for (const auto& k : seen)
      if (k == key) throw ConfigParseError(line, "duplicate key '" + key + "'");
    seen.push_back(key);

    if (key == "radius") cfg.radius = parse_double(val, line, key);
    else if (key == "amplitude") cfg.amplitude = parse_double(val, line, key);
    else if (key == "m") cfg.m = parse_double(val, line, key);
    else if (key == "I") cfg.I = parse_double(val, line, key);
    else if (key == "N") cfg.N = static_cast<int>(parse_int(val, line, key));
    else if (key == "L") cfg.L = parse_double(val, line, key);
    else if (key == "K") cfg.K = parse_double(val, line, key);
    else if (key == "v") cfg.v = parse_vec3(val, line, key);
    else if (key == "omega") cfg.omega = parse_vec3(val, line, key);
    else if (key == "eps") cfg.eps = parse_double(val, line, key);
    else if (key == "T") cfg.T = parse_double(val, line, key);
    else if (key == "dt") cfg.dt = parse_double(val, line, key);
    else if (key == "seed") cfg.seed = parse_u64(val, line, key);
    else if (key == "record_every") cfg.record_every = static_cast<int>(parse_int(val, line, key));
    else if (key == "resolutions") {
      cfg.resolutions.clear();
      for (const auto& tok : split_ws(val))
        cfg.resolutions.push_back(static_cast<int>(parse_int(tok, line, key)));
    } else if (key == "sweep_parameter") {
      cfg.sweep_parameter = val;
    } else if (key == "sweep_values") {
      cfg.sweep_values.clear();
      for (const auto& tok : split_ws(val)) cfg.sweep_values.push_back(parse_double(tok, line, key));
    } else {
      throw ConfigParseError(line, "unknown key '" + key + "'");
    }
  }
  validate_config(cfg);
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void validate_config(const RunConfig& cfg) {
  auto fail = [](const std::string& msg) { throw ConfigValidationError("invalid config: " + msg); };
  if (!(cfg.radius > 0.0)) fail("radius must be positive");
  if (!(cfg.amplitude > 0.0)) fail("amplitude must be positive");
  if (!(cfg.m > 0.0)) fail("m must be positive");
  if (!(cfg.I > 0.0)) fail("I must be positive");
  if (cfg.N < 8 || cfg.N % 2 != 0) fail("N must be an even integer >= 8");
  if (!(cfg.L > 0.0)) fail("L must be positive");
  if (!(cfg.radius < cfg.L)) fail("charge support must fit inside the box (radius < L)");
  if (!(cfg.K > 0.0)) fail("K must be positive");
  if (!(norm(cfg.v) < 1.0)) fail("superluminal velocity: |v| must be < 1");
  try {
    validate_sigma(cfg.v, cfg.omega);
  } catch (const SigmaError&) {
    fail("omega must be parallel or perpendicular to v (admissible-rotation condition)");
  }
  if (!(cfg.eps >= 0.0)) fail("eps must be nonnegative");
  if (!(cfg.T > 0.0)) fail("T must be positive");
  if (cfg.dt < 0.0) fail("dt must be nonnegative (0 selects the CFL bound)");
  if (cfg.dt > 0.0 && cfg.dt > cfg.cfl_bound() * 1.0000001)
    fail("dt exceeds the CFL bound 0.5 h / (1 + |v|) = " + fmt(cfg.cfl_bound()));
  if (cfg.record_every < 1) fail("record_every must be >= 1");
  if (cfg.resolutions.empty()) fail("resolutions must be nonempty");
  for (int n : cfg.resolutions)
    if (n < 8 || n % 2 != 0) fail("resolutions must be even integers >= 8");
  if (cfg.sweep_parameter != "v" && cfg.sweep_parameter != "omega" && cfg.sweep_parameter != "eps")
    fail("sweep_parameter must be one of: v, omega, eps");
  if (cfg.sweep_values.empty()) fail("sweep_values must be nonempty");
  if (cfg.sweep_parameter == "v")
    for (double s : cfg.sweep_values)
      if (!(s >= 0.0 && s < 1.0)) fail("sweep over v requires speeds in [0, 1)");
}

std::string emit_canonical(const RunConfig& cfg) {
  std::ostringstream out;
  out << "[profile]\n";
  out << "radius = " << fmt(cfg.radius) << "\n";
  out << "amplitude = " << fmt(cfg.amplitude) << "\n";
  out << "\n[physics]\n";
  out << "m = " << fmt(cfg.m) << "\n";
  out << "I = " << fmt(cfg.I) << "\n";
  out << "\n[grid]\n";
  out << "N = " << cfg.N << "\n";
  out << "L = " << fmt(cfg.L) << "\n";
  out << "K = " << fmt(cfg.K) << "\n";
  out << "\n[experiment]\n";
  out << "v = " << fmt(cfg.v.x) << " " << fmt(cfg.v.y) << " " << fmt(cfg.v.z) << "\n";
  out << "omega = " << fmt(cfg.omega.x) << " " << fmt(cfg.omega.y) << " " << fmt(cfg.omega.z)
      << "\n";
  out << "eps = " << fmt(cfg.eps) << "\n";
  out << "T = " << fmt(cfg.T) << "\n";
  out << "dt = " << fmt(cfg.dt) << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "record_every = " << cfg.record_every << "\n";
  out << "resolutions =";
  for (int n : cfg.resolutions) out << " " << n;
  out << "\n";
  out << "sweep_parameter = " << cfg.sweep_parameter << "\n";
  out << "sweep_values =";
  for (double s : cfg.sweep_values) out << " " << fmt(s);
  out << "\n";
  return out.str();
}

}  // namespace mls
