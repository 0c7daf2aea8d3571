#pragma once

// Run configuration for the command-line front end, read from INI files.
//
//   [atom]        species, n, temperature_K
//   [geometry]    separation_um, exclusion_radius_um, orientation
//   [gate]        omega10_GHz, rabi_MHz, blockade_GHz, lifetime_ms
//   [tomography]  likelihood, sampling, shots, seed, frame_correction
//   [output]      format, path
//   [reference]   published values for table1 columns (optional)
//
// Frequencies in files are cyclic (Omega/2pi); RunConfig stores SI and rad/s.
// Unknown sections or keys are errors.

#include "rydcz/atomic.hpp"
#include "rydcz/blockade.hpp"
#include "rydcz/constants.hpp"
#include "rydcz/error_model.hpp"
#include "rydcz/tomography.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rydcz {

enum class OutputFormat { csv, json };

/// Collects every problem found in a configuration rather than the first.
class validation_error : public std::runtime_error {
 public:
  explicit validation_error(std::vector<std::string> problems)
      : std::runtime_error(join(problems)), problems_(std::move(problems)) {}
  [[nodiscard]] const std::vector<std::string>& problems() const { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& p) {
    std::string s = "invalid configuration:";
    for (const auto& x : p) s += "\n  " + x;
    return s;
  }
  std::vector<std::string> problems_;
};

/// Table 1 values printed for one column.
struct ReferenceValues {
  std::optional<double> rabi_MHz, blockade_GHz, lifetime_ms, e_cb, trace_loss, e_o;
};

struct RunConfig {
  std::string name = "custom";
  std::string species = "133Cs";
  int n = 110;
  double temperature = 0.0;                          // K
  double separation = 2.0 * micrometre;              // m
  double exclusion_radius = default_exclusion_radius;  // m
  Orientation orientation = Orientation::parallel;
  double omega_10 = cs_clock_rad_s;                  // rad/s
  std::optional<double> omega;                       // rad/s, default optimal_rabi
  std::optional<double> blockade_B;                  // rad/s, default from n and R
  std::optional<double> tau;                         // s, default lifetime(n, T)
  Likelihood likelihood = Likelihood::least_squares;
  bool sampling = false;
  std::uint64_t shots = 10'000;
  std::uint64_t seed = 0;
  bool frame_correction = true;
  OutputFormat format = OutputFormat::json;
  std::string output_path;  // empty: stdout
  ReferenceValues reference;
};

inline std::vector<std::string> validate(const RunConfig& c) {
  std::vector<std::string> p;
  if (c.n < 2) p.push_back("atom.n must be >= 2");
  if (!(c.temperature >= 0.0) || !std::isfinite(c.temperature)) p.push_back("atom.temperature_K must be finite and >= 0");
  if (!(c.separation > 0.0) || !std::isfinite(c.separation)) p.push_back("geometry.separation_um must be positive");
  if (!(c.exclusion_radius >= 0.0)) p.push_back("geometry.exclusion_radius_um must be >= 0");
  if (!(c.omega_10 > 0.0) || !std::isfinite(c.omega_10)) p.push_back("gate.omega10_GHz must be positive");
  if (c.omega && (!(*c.omega > 0.0) || !std::isfinite(*c.omega))) p.push_back("gate.rabi_MHz must be positive");
  if (c.blockade_B && (!(*c.blockade_B > 0.0) || !std::isfinite(*c.blockade_B)))
    p.push_back("gate.blockade_GHz must be positive");
  if (c.tau && !(*c.tau > 0.0)) p.push_back("gate.lifetime_ms must be positive or inf");
  if (c.tau && std::isinf(*c.tau) && !c.omega) p.push_back("gate.rabi_MHz is required when gate.lifetime_ms = inf");
  if (c.sampling && c.shots == 0) p.push_back("tomography.shots must be positive when sampling");
  return p;
}

namespace detail {

using ptree = boost::property_tree::ptree;

inline const std::map<std::string, std::set<std::string>>& config_schema() {
  static const std::map<std::string, std::set<std::string>> schema{
      {"atom", {"species", "n", "temperature_K"}},
      {"geometry", {"separation_um", "exclusion_radius_um", "orientation"}},
      {"gate", {"omega10_GHz", "rabi_MHz", "blockade_GHz", "lifetime_ms"}},
      {"tomography", {"likelihood", "sampling", "shots", "seed", "frame_correction"}},
      {"output", {"format", "path"}},
      {"reference", {"rabi_MHz", "blockade_GHz", "lifetime_ms", "E_cb", "trace_loss", "E_O"}},
  };
  return schema;
}

class ConfigReader {
 public:
  std::vector<std::string> problems;
  std::string source;

  std::optional<double> number(const std::string& key, const std::string& text) {
    std::string s = text;
    if (s == "inf" || s == "+inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      problems.push_back(source + ": " + key + ": not a number: '" + text + "'");
      return std::nullopt;
    }
  }

  std::optional<std::int64_t> integer(const std::string& key, const std::string& text) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return v;
    } catch (const std::exception&) {
      problems.push_back(source + ": " + key + ": not an integer: '" + text + "'");
      return std::nullopt;
    }
  }

  std::optional<std::uint64_t> unsigned_integer(const std::string& key, const std::string& text) {
    try {
      std::size_t used = 0;
      if (!text.empty() && text.front() == '-') throw std::invalid_argument(text);
      const unsigned long long v = std::stoull(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return v;
    } catch (const std::exception&) {
      problems.push_back(source + ": " + key + ": not a non-negative integer: '" + text + "'");
      return std::nullopt;
    }
  }

  std::optional<bool> boolean(const std::string& key, const std::string& text) {
    if (text == "true" || text == "yes" || text == "1") return true;
    if (text == "false" || text == "no" || text == "0") return false;
    problems.push_back(source + ": " + key + ": expected true or false, got '" + text + "'");
    return std::nullopt;
  }
};

}  // namespace detail

/// Apply the keys present in an INI stream on top of `base`. Throws
/// validation_error listing every problem.
inline RunConfig apply_config(RunConfig base, std::istream& in, const std::string& source = "<config>") {
  detail::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw validation_error({source + ": " + e.message() + " (line " + std::to_string(e.line()) + ")"});
  }
  detail::ConfigReader r;
  r.source = source;
  const auto& schema = detail::config_schema();
  RunConfig& c = base;

  for (const auto& [section, body] : tree) {
    const auto it = schema.find(section);
    if (it == schema.end()) {
      r.problems.push_back(source + ": unknown " + (body.empty() ? "key '" : "section '") + section + "'");
      continue;
    }
    for (const auto& [key, node] : body) {
      const std::string full = section + "." + key;
      if (!it->second.contains(key)) {
        r.problems.push_back(source + ": unknown key '" + full + "'");
        continue;
      }
      const std::string v = node.get_value<std::string>();
      if (section == "atom") {
        if (key == "species") c.species = v;
        else if (key == "n") { if (auto x = r.integer(full, v)) c.n = static_cast<int>(*x); }
        else if (key == "temperature_K") { if (auto x = r.number(full, v)) c.temperature = *x; }
      } else if (section == "geometry") {
        if (key == "separation_um") { if (auto x = r.number(full, v)) c.separation = *x * micrometre; }
        else if (key == "exclusion_radius_um") { if (auto x = r.number(full, v)) c.exclusion_radius = *x * micrometre; }
        else if (key == "orientation") {
          if (v == "parallel") c.orientation = Orientation::parallel;
          else if (v == "perpendicular") c.orientation = Orientation::perpendicular;
          else r.problems.push_back(source + ": " + full + ": expected parallel or perpendicular, got '" + v + "'");
        }
      } else if (section == "gate") {
        if (key == "omega10_GHz") { if (auto x = r.number(full, v)) c.omega_10 = to_rad_s(*x * 1e9); }
        else if (key == "rabi_MHz") { if (auto x = r.number(full, v)) c.omega = to_rad_s(*x * 1e6); }
        else if (key == "blockade_GHz") { if (auto x = r.number(full, v)) c.blockade_B = to_rad_s(*x * 1e9); }
        else if (key == "lifetime_ms") { if (auto x = r.number(full, v)) c.tau = *x * 1e-3; }
      } else if (section == "tomography") {
        if (key == "likelihood") {
          if (v == "least_squares") c.likelihood = Likelihood::least_squares;
          else if (v == "cross_entropy") c.likelihood = Likelihood::cross_entropy;
          else r.problems.push_back(source + ": " + full + ": expected least_squares or cross_entropy, got '" + v + "'");
        } else if (key == "sampling") { if (auto x = r.boolean(full, v)) c.sampling = *x; }
        else if (key == "shots") { if (auto x = r.unsigned_integer(full, v)) c.shots = *x; }
        else if (key == "seed") { if (auto x = r.unsigned_integer(full, v)) c.seed = *x; }
        else if (key == "frame_correction") { if (auto x = r.boolean(full, v)) c.frame_correction = *x; }
      } else if (section == "output") {
        if (key == "format") {
          if (v == "csv") c.format = OutputFormat::csv;
          else if (v == "json") c.format = OutputFormat::json;
          else r.problems.push_back(source + ": " + full + ": expected csv or json, got '" + v + "'");
        } else if (key == "path") c.output_path = v;
      } else if (section == "reference") {
        auto x = r.number(full, v);
        if (!x) continue;
        if (key == "rabi_MHz") c.reference.rabi_MHz = x;
        else if (key == "blockade_GHz") c.reference.blockade_GHz = x;
        else if (key == "lifetime_ms") c.reference.lifetime_ms = x;
        else if (key == "E_cb") c.reference.e_cb = x;
        else if (key == "trace_loss") c.reference.trace_loss = x;
        else if (key == "E_O") c.reference.e_o = x;
      }
    }
  }
  for (auto& p : validate(c)) r.problems.push_back(source + ": " + p);
  if (!r.problems.empty()) throw validation_error(std::move(r.problems));
  return c;
}

inline RunConfig parse_config(const std::string& text, const std::string& source = "<config>") {
  std::istringstream in(text);
  return apply_config(RunConfig{}, in, source);
}

inline RunConfig load_config(const std::filesystem::path& path, RunConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw validation_error({"cannot open config file '" + path.string() + "'"});
  return apply_config(std::move(base), in, path.string());
}

/// Preset directory: $RYDCZ_PRESET_DIR, else the source tree's presets/.
inline std::filesystem::path preset_directory() {
  if (const char* env = std::getenv("RYDCZ_PRESET_DIR")) return env;
#ifdef RYDCZ_SOURCE_DIR
  return std::filesystem::path(RYDCZ_SOURCE_DIR) / "presets";
#else
  return "presets";
#endif
}

inline RunConfig load_preset(const std::string& name, const std::filesystem::path& dir = preset_directory()) {
  const auto path = dir / (name + ".ini");
  if (!std::filesystem::exists(path)) throw validation_error({"unknown preset '" + name + "' (looked in " + dir.string() + ")"});
  RunConfig c = load_config(path);
  c.name = name;
  return c;
}

// ---------------------------------------------------------------------------
// Derived gate parameters

struct ResolvedGate {
  GateParams params;
  double v_dd = 0.0;      // rad/s, zero when B was given explicitly
  double delta = 0.0;     // rad/s
  bool inside_exclusion = false;
};

inline double config_lifetime(const RunConfig& c) { return c.tau ? *c.tau : lifetime(c.n, c.temperature); }

inline ResolvedGate resolve_gate(const RunConfig& c) {
  if (auto p = validate(c); !p.empty()) throw validation_error(std::move(p));
  ResolvedGate g;
  const PairGeometry geometry(c.separation, c.orientation, c.exclusion_radius);
  g.inside_exclusion = geometry.inside_exclusion();
  double b = 0.0;
  if (c.blockade_B) {
    b = *c.blockade_B;
  } else if (c.orientation == Orientation::parallel) {
    const auto r = blockade_shift(c.n, geometry);
    b = r.blockade_shift;
    g.v_dd = r.v_dd;
    g.delta = r.delta;
  } else {
    b = blockade_shift_perpendicular(c.n, c.separation);
    g.v_dd = b;
  }
  const double tau = config_lifetime(c);
  const double omega = c.omega ? *c.omega : optimal_rabi(b, tau);
  g.params = GateParams{omega, c.omega_10, b, tau};
  g.params.validate();
  return g;
}

inline QptOptions qpt_options(const RunConfig& c) {
  QptOptions o;
  o.state_mle.likelihood = c.likelihood;
  o.sampling.enabled = c.sampling;
  o.sampling.shots = c.shots;
  o.sampling.seed = c.seed;
  o.qubit_frame = c.frame_correction;
  return o;
}

}  // namespace rydcz
