#pragma once
// Flat key = value scenario configuration with a published schema.  Parsing
// and validation are separated so the CLI can report schema violations (the
// offending key by name) before any grid or operator is allocated.

#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "grid.hpp"
#include "transfer.hpp"

namespace evomax {

struct ConfigError : std::runtime_error {
  std::string key;
  ConfigError(std::string k, const std::string& msg)
      : std::runtime_error("config key '" + k + "': " + msg), key(std::move(k)) {}
};

struct FieldSpec {
  std::string key;
  std::string type;     // int | real | bool | enum | string
  std::string def;      // default, as config text
  std::string allowed;  // enum values or range note
  std::string description;
};

inline const std::vector<FieldSpec>& config_schema() {
  static const std::vector<FieldSpec> s = {
      {"scenario", "enum", "identity_suite",
       "solve, transfer_check, dirac_equivalence, potential_reconstruction, maxwell_dirac, "
       "identity_suite",
       "what to run"},
      {"backend", "enum", "periodic", "periodic, staggered",
       "spatial discretization backend (staggered carries the electric boundary condition)"},
      {"n1", "int", "3", ">= 2 (>= 3 for staggered)", "cells along axis 1"},
      {"n2", "int", "3", ">= 2 (>= 3 for staggered)", "cells along axis 2"},
      {"n3", "int", "3", ">= 2 (>= 3 for staggered)", "cells along axis 3"},
      {"h", "real", "0.25", "> 0", "uniform grid spacing"},
      {"system", "enum", "extended", "maxwell, extended, gem",
       "which evolutionary system a solve-type scenario uses"},
      {"integrator", "enum", "implicit_euler", "implicit_euler, crank_nicolson, exponential",
       "time integrator (exponential requires material = identity and <= 4096 dofs)"},
      {"tau", "real", "0.05", "> 0, tau * nu < 1", "time step"},
      {"steps", "int", "40", ">= 1", "number of time steps"},
      {"nu", "real", "1.0", ">= 0", "exponential weight rate for the weighted norm"},
      {"material", "enum", "identity", "identity, eddy_current, random_diagonal, gem_random, "
       "mismatched",
       "material/weight preset; eddy_current needs system = maxwell, gem_random needs system = "
       "gem, mismatched (a deliberately non-block weight) needs scenario = transfer_check"},
      {"source", "enum", "zero", "zero, random, sine, impulse_random",
       "right-hand side profile; random data derive from the single seed"},
      {"amplitude", "real", "1.0", ">= 0", "source amplitude"},
      {"seed", "int", "1", ">= 0", "seed for every random draw in the scenario"},
      {"output_dir", "string", "out", "path",
       "output directory; the environment variable EVOMAX_OUTPUT_DIR overrides it"},
      {"dump_fields", "bool", "false", "true, false",
       "write the trajectory as a raw field dump (header "
       "\"EVOF1 <ncomponents> <dofs> <nsteps> little-endian f64\", then contiguous samples)"},
      {"dump_operators", "bool", "false", "true, false",
       "write the system operator as coordinate text (row col value, 17 significant digits)"},
  };
  return s;
}

struct ScenarioConfig {
  std::string scenario = "identity_suite";
  Backend backend = Backend::periodic;
  int n1 = 3, n2 = 3, n3 = 3;
  double h = 0.25;
  std::string system = "extended";
  Integrator integrator = Integrator::implicit_euler;
  double tau = 0.05;
  int steps = 40;
  double nu = 1.0;
  std::string material = "identity";
  std::string source = "zero";
  double amplitude = 1.0;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  bool dump_fields = false;
  bool dump_operators = false;

  GridSpec grid() const { return GridSpec{backend, {n1, n2, n3}, h}; }
  TimeGrid time_grid() const { return TimeGrid{tau, steps, 0.0, nu}; }
};

// Lines of "key = value"; '#' starts a comment; blank lines are skipped.
inline std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> raw;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(line, "line " + std::to_string(lineno) + " is not of the form key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(line, "line " + std::to_string(lineno) + " has an empty key");
    if (raw.count(key))
      throw ConfigError(key, "appears more than once (line " + std::to_string(lineno) + ")");
    raw[key] = value;
  }
  return raw;
}

namespace detail {

inline const FieldSpec& field_spec(const std::string& key) {
  for (const auto& f : config_schema())
    if (f.key == key) return f;
  throw ConfigError(key, "not in the schema");
}

inline bool enum_ok(const std::string& key, const std::string& value) {
  const std::string& allowed = field_spec(key).allowed;
  std::size_t pos = 0;
  while (pos < allowed.size()) {
    auto end = allowed.find(", ", pos);
    if (end == std::string::npos) end = allowed.size();
    if (allowed.substr(pos, end - pos) == value) return true;
    pos = end + 2;
  }
  return false;
}

inline int parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long x = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return int(x);
  } catch (const std::exception&) {
    throw ConfigError(key, "expected an integer, got '" + v + "'");
  }
}

inline double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a real number, got '" + v + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key, "expected true or false, got '" + v + "'");
}

}  // namespace detail

inline ScenarioConfig validate_config(const std::map<std::string, std::string>& raw) {
  for (const auto& [key, value] : raw) {
    bool known = false;
    for (const auto& f : config_schema()) known = known || f.key == key;
    if (!known) throw ConfigError(key, "unknown key (value '" + value + "')");
  }

  ScenarioConfig c;
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = raw.find(key);
    return it == raw.end() ? detail::field_spec(key).def : it->second;
  };
  auto get_enum = [&](const std::string& key) {
    const std::string& v = get(key);
    if (!detail::enum_ok(key, v))
      throw ConfigError(key, "'" + v + "' is not one of: " + detail::field_spec(key).allowed);
    return v;
  };

  c.scenario = get_enum("scenario");
  c.backend = get_enum("backend") == "periodic" ? Backend::periodic : Backend::staggered;
  c.n1 = detail::parse_int("n1", get("n1"));
  c.n2 = detail::parse_int("n2", get("n2"));
  c.n3 = detail::parse_int("n3", get("n3"));
  c.h = detail::parse_real("h", get("h"));
  c.system = get_enum("system");
  const std::string it_name = get_enum("integrator");
  c.integrator = it_name == "implicit_euler"   ? Integrator::implicit_euler
                 : it_name == "crank_nicolson" ? Integrator::crank_nicolson
                                               : Integrator::exponential;
  c.tau = detail::parse_real("tau", get("tau"));
  c.steps = detail::parse_int("steps", get("steps"));
  c.nu = detail::parse_real("nu", get("nu"));
  c.material = get_enum("material");
  c.source = get_enum("source");
  c.amplitude = detail::parse_real("amplitude", get("amplitude"));
  const int seed = detail::parse_int("seed", get("seed"));
  if (seed < 0) throw ConfigError("seed", "must be >= 0");
  c.seed = std::uint64_t(seed);
  c.output_dir = get("output_dir");
  c.dump_fields = detail::parse_bool("dump_fields", get("dump_fields"));
  c.dump_operators = detail::parse_bool("dump_operators", get("dump_operators"));

  const int min_n = c.backend == Backend::staggered ? 3 : 2;
  auto check_n = [&](const char* key, int n) {
    if (n < min_n)
      throw ConfigError(key, "must be >= " + std::to_string(min_n) + " for backend " +
                                 std::string(c.backend == Backend::staggered ? "staggered"
                                                                             : "periodic"));
  };
  check_n("n1", c.n1);
  check_n("n2", c.n2);
  check_n("n3", c.n3);
  if (!(c.h > 0)) throw ConfigError("h", "must be > 0");
  if (!(c.tau > 0)) throw ConfigError("tau", "must be > 0");
  if (c.steps < 1) throw ConfigError("steps", "must be >= 1");
  if (c.nu < 0) throw ConfigError("nu", "must be >= 0");
  if (!(c.tau * c.nu < 1.0))
    throw ConfigError("tau", "tau * nu must be < 1 for the weighted norm");
  if (c.amplitude < 0) throw ConfigError("amplitude", "must be >= 0");
  if (c.output_dir.empty()) throw ConfigError("output_dir", "must not be empty");

  if ((c.scenario == "dirac_equivalence" || c.scenario == "maxwell_dirac") &&
      c.backend != Backend::periodic)
    throw ConfigError("backend", "scenario " + c.scenario + " requires backend = periodic");
  if (c.scenario == "transfer_check" && c.system == "maxwell")
    throw ConfigError("system", "transfer_check moves sources between the extended (or GEM) "
                                "system and Maxwell; set system = extended or system = gem");
  if (c.scenario == "maxwell_dirac" && c.system != "extended")
    throw ConfigError("system", "maxwell_dirac is built on the extended system");
  if (c.scenario == "transfer_check" && c.source == "impulse_random")
    throw ConfigError("source",
                      "the transfer maps act on regular (impulse-free) sources; pick zero, "
                      "random, or sine");

  if (c.material == "eddy_current" && c.system != "maxwell")
    throw ConfigError("material", "eddy_current applies to system = maxwell only");
  if (c.material == "gem_random" && c.system != "gem")
    throw ConfigError("material", "gem_random applies to system = gem only");
  if (c.material == "gem_random" && c.backend != Backend::periodic)
    throw ConfigError("material", "gem_random requires backend = periodic");
  if (c.material == "mismatched" && c.scenario != "transfer_check")
    throw ConfigError("material",
                      "mismatched is a transfer_check negative control; use scenario = "
                      "transfer_check");
  if (c.integrator == Integrator::exponential && c.material != "identity")
    throw ConfigError("integrator", "exponential requires material = identity");
  return c;
}

inline std::string default_config_text() {
  std::ostringstream os;
  os << "# default configuration (all keys at schema defaults)\n";
  for (const auto& f : config_schema()) os << f.key << " = " << f.def << "\n";
  return os.str();
}

inline std::string schema_text() {
  std::ostringstream os;
  os << "Configuration schema (flat key = value lines; '#' comments)\n\n";
  for (const auto& f : config_schema())
    os << "  " << f.key << "  (" << f.type << ", default: " << f.def << ")\n"
       << "      allowed: " << f.allowed << "\n"
       << "      " << f.description << "\n";
  os << "\nOutputs (written to the output directory)\n"
        "  report.json      identity report: entries (name, anchor, residual, tolerance,\n"
        "                   pass), environment fingerprint, config echo; byte-identical\n"
        "                   for identical config + seed (timestamps go to run_meta.txt)\n"
        "  run_meta.txt     wall-clock timestamp and elapsed time (excluded from the report)\n"
        "  trajectory.csv   time-stepping diagnostics; columns: t, energy (<U, M0 U>),\n"
        "                   weighted_norm (exp(-nu t) grid norm), norm_<part> per state\n"
        "                   component block, plus charge_residual and picard_iters\n"
        "                   for maxwell_dirac\n"
        "  fields.evof1     raw field dump (dump_fields = true): ASCII header line\n"
        "                   \"EVOF1 <ncomponents> <dofs> <nsteps> little-endian f64\"\n"
        "                   followed by nsteps contiguous samples of dofs doubles\n"
        "  operator.txt     coordinate dump of the system operator (dump_operators = true):\n"
        "                   one \"row col value\" line per entry, 17 significant digits\n";
  return os.str();
}

}  // namespace evomax
