#pragma once

#include "idp/core/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace idp {

/// Everything needed to set up and run one of the built-in cases. Unset
/// optionals fall back to the case defaults (see make_case).
///
/// File format: INI sections with `key = value` lines, `;` or `#` comments.
///
///   [case]    name = becker1d | becker2d | sod1d | shocktube2d
///   [mesh]    n, nx, ny, file, pattern = alternating | uniform, strict_acute
///   [gas]     gamma, mu, lambda, prandtl
///   [becker]  mach, v0, rho0, v_inf
///   [time]    cfl, t_final, max_steps, audit_every
///   [limiter] high_order, limit, relax_bounds, indicator_pairing = max | mean
///   [solver]  cg_tol, energy_floor = previous_minimum | dissipation_shifted
///   [output]  directory, snapshots (comma list), prefix, reproducible
struct RunConfig {
  std::string case_name = "becker1d";
  std::string source = "<defaults>";

  std::optional<int> n, nx, ny;
  std::optional<std::string> mesh_file;
  std::string pattern = "alternating";
  bool strict_acute = false;

  std::optional<double> gamma, mu, lambda, prandtl;
  std::optional<double> mach, v0, rho0, v_inf;

  std::optional<double> cfl, t_final;
  long max_steps = 10'000'000;
  int audit_every = 1;

  bool high_order = true;
  bool limit = true;
  bool relax_bounds = false;
  std::string indicator_pairing = "max";

  double cg_tol = 1e-10;
  std::string energy_floor = "previous_minimum";

  std::string output_directory = "output";
  std::optional<std::vector<double>> snapshots;
  std::string prefix;
  /// The solver is single-threaded with a fixed reduction order, so runs are
  /// always bitwise reproducible; the flag is accepted for completeness.
  bool reproducible = true;
};

namespace detail {

inline const std::map<std::string, std::set<std::string>>& config_schema() {
  static const std::map<std::string, std::set<std::string>> schema{
      {"case", {"name"}},
      {"mesh", {"n", "nx", "ny", "file", "pattern", "strict_acute"}},
      {"gas", {"gamma", "mu", "lambda", "prandtl"}},
      {"becker", {"mach", "v0", "rho0", "v_inf"}},
      {"time", {"cfl", "t_final", "max_steps", "audit_every"}},
      {"limiter", {"high_order", "limit", "relax_bounds", "indicator_pairing"}},
      {"solver", {"cg_tol", "energy_floor"}},
      {"output", {"directory", "snapshots", "prefix", "reproducible"}},
  };
  return schema;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

/// Strip trailing `;` / `#` comments, which the INI reader keeps in values.
inline std::string strip_comment(const std::string& s) {
  const auto pos = s.find_first_of(";#");
  return trim(pos == std::string::npos ? s : s.substr(0, pos));
}

class FieldReader {
 public:
  FieldReader(std::string source, std::string key, std::string raw)
      : source_(std::move(source)), key_(std::move(key)), raw_(strip_comment(raw)) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(source_ + ": field '" + key_ + "': " + what + " (got '" + raw_ + "')");
  }

  double number() const {
    try {
      std::size_t pos = 0;
      const double v = std::stod(raw_, &pos);
      if (pos != raw_.size()) fail("expected a number");
      return v;
    } catch (const std::logic_error&) {
      fail("expected a number");
    }
  }

  long integer() const {
    try {
      std::size_t pos = 0;
      const long v = std::stol(raw_, &pos);
      if (pos != raw_.size()) fail("expected an integer");
      return v;
    } catch (const std::logic_error&) {
      fail("expected an integer");
    }
  }

  bool boolean() const {
    if (raw_ == "true" || raw_ == "1" || raw_ == "yes" || raw_ == "on") return true;
    if (raw_ == "false" || raw_ == "0" || raw_ == "no" || raw_ == "off") return false;
    fail("expected a boolean");
  }

  std::string text() const { return raw_; }

  std::vector<double> number_list() const {
    std::vector<double> out;
    std::stringstream ss(raw_);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      out.push_back(FieldReader(source_, key_, item).number());
    }
    return out;
  }

 private:
  std::string source_, key_, raw_;
};

}  // namespace detail

/// Parses an INI stream. Unknown sections or keys and malformed values are
/// reported with the offending field.
inline RunConfig parse_config(std::istream& in, const std::string& source = "<stream>") {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    std::ostringstream os;
    os << source << ":" << e.line() << ": " << e.message();
    throw ConfigError(os.str());
  }
  RunConfig c;
  c.source = source;
  const auto& schema = detail::config_schema();
  for (const auto& [section, body] : tree) {
    const auto it = schema.find(section);
    if (it == schema.end() || body.empty())
      throw ConfigError(source + ": unknown section '" + section + "'");
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) throw ConfigError(source + ": unknown field '" + section + "." + key + "'");
      const detail::FieldReader r(source, section + "." + key, value.data());
      const std::string id = section + "." + key;
      if (id == "case.name") c.case_name = r.text();
      else if (id == "mesh.n") c.n = static_cast<int>(r.integer());
      else if (id == "mesh.nx") c.nx = static_cast<int>(r.integer());
      else if (id == "mesh.ny") c.ny = static_cast<int>(r.integer());
      else if (id == "mesh.file") c.mesh_file = r.text();
      else if (id == "mesh.pattern") {
        c.pattern = r.text();
        if (c.pattern != "alternating" && c.pattern != "uniform") r.fail("expected alternating or uniform");
      } else if (id == "mesh.strict_acute") c.strict_acute = r.boolean();
      else if (id == "gas.gamma") c.gamma = r.number();
      else if (id == "gas.mu") c.mu = r.number();
      else if (id == "gas.lambda") c.lambda = r.number();
      else if (id == "gas.prandtl") c.prandtl = r.number();
      else if (id == "becker.mach") c.mach = r.number();
      else if (id == "becker.v0") c.v0 = r.number();
      else if (id == "becker.rho0") c.rho0 = r.number();
      else if (id == "becker.v_inf") c.v_inf = r.number();
      else if (id == "time.cfl") c.cfl = r.number();
      else if (id == "time.t_final") c.t_final = r.number();
      else if (id == "time.max_steps") c.max_steps = r.integer();
      else if (id == "time.audit_every") c.audit_every = static_cast<int>(r.integer());
      else if (id == "limiter.high_order") c.high_order = r.boolean();
      else if (id == "limiter.limit") c.limit = r.boolean();
      else if (id == "limiter.relax_bounds") c.relax_bounds = r.boolean();
      else if (id == "limiter.indicator_pairing") {
        c.indicator_pairing = r.text();
        if (c.indicator_pairing != "mean" && c.indicator_pairing != "max") r.fail("expected mean or max");
      }      else if (id == "solver.cg_tol") c.cg_tol = r.number();
      else if (id == "solver.energy_floor") {
        c.energy_floor = r.text();
        if (c.energy_floor != "previous_minimum" && c.energy_floor != "dissipation_shifted")
          r.fail("expected previous_minimum or dissipation_shifted");
      } else if (id == "output.directory") c.output_directory = r.text();
      else if (id == "output.snapshots") c.snapshots = r.number_list();
      else if (id == "output.prefix") c.prefix = r.text();
      else if (id == "output.reproducible") c.reproducible = r.boolean();
    }
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  RunConfig c = parse_config(in, path);
  // Relative mesh paths are resolved against the config file's directory.
  if (c.mesh_file && !c.mesh_file->empty() && (*c.mesh_file)[0] != '/') {
    const auto slash = path.find_last_of('/');
    if (slash != std::string::npos) c.mesh_file = path.substr(0, slash + 1) + *c.mesh_file;
  }
  return c;
}

/// Output directory after the IDP_OUTPUT_DIR environment override.
inline std::string resolve_output_directory(const RunConfig& c) {
  if (const char* env = std::getenv("IDP_OUTPUT_DIR"); env && *env) return env;
  return c.output_directory;
}

}  // namespace idp
