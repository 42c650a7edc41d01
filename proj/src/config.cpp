#include "machzero/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace machzero {

namespace {

[[noreturn]] void fail(const std::string& what) {
  throw std::runtime_error("config error: " + what);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class KeyMap {
 public:
  explicit KeyMap(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        std::ostringstream msg;
        msg << "line " << lineno << " is not `key = value`: " << line;
        fail(msg.str());
      }
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) fail("empty key on line " + std::to_string(lineno));
      if (entries_.count(key)) fail("duplicate key " + key);
      entries_[key] = value;
    }
  }

  bool has(const std::string& key) {
    touched_.insert(key);
    return entries_.count(key) > 0;
  }

  std::string str(const std::string& key) {
    touched_.insert(key);
    const auto it = entries_.find(key);
    if (it == entries_.end()) fail("missing required key " + key);
    return it->second;
  }

  std::string str_or(const std::string& key, const std::string& fallback) {
    return has(key) ? str(key) : fallback;
  }

  double num(const std::string& key) { return to_num(key, str(key)); }

  double num_or(const std::string& key, double fallback) {
    return has(key) ? num(key) : fallback;
  }

  int integer(const std::string& key) {
    const double v = num(key);
    const int i = static_cast<int>(v);
    if (v != i) fail("key " + key + " must be an integer");
    return i;
  }

  int integer_or(const std::string& key, int fallback) {
    return has(key) ? integer(key) : fallback;
  }

  std::vector<double> list(const std::string& key) {
    std::vector<double> out;
    std::string text = str(key);
    std::replace(text.begin(), text.end(), ',', ' ');
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) out.push_back(to_num(key, tok));
    if (out.empty()) fail("key " + key + " holds an empty list");
    return out;
  }

  void reject_unknown() const {
    for (const auto& [key, value] : entries_) {
      if (!touched_.count(key)) fail("unknown key " + key);
    }
  }

 private:
  static double to_num(const std::string& key, const std::string& text) {
    double v = 0.0;
    const char* b = text.data();
    const char* e = b + text.size();
    const auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e) {
      fail("key " + key + " has a non-numeric value `" + text + "`");
    }
    return v;
  }

  std::map<std::string, std::string> entries_;
  std::set<std::string> touched_;
};

}  // namespace

NozzleMap RunConfig::make_map() const {
  if (geometry_kind == "straight") return NozzleMap::straight();
  return NozzleMap::sinusoidal(amplitude, period);
}

GasLaw RunConfig::make_gas() const {
  if (gas_kind == "polytropic") return GasLaw::polytropic(gamma);
  return GasLaw::isothermal();
}

ForcePotential RunConfig::make_force() const {
  if (force_kind == "zero") return ForcePotential::zero();
  if (force_kind == "linear") {
    return ForcePotential::linear(force_g, make_map().transverse_halfwidth());
  }
  return ForcePotential::bump(force_height, force_center_t, force_center_z,
                              force_width);
}

PicardOptions RunConfig::make_picard_options() const {
  PicardOptions opts;
  opts.cg_tol = cg_tol;
  opts.picard_tol = picard_tol;
  opts.max_iterations = max_picard;
  return opts;
}

RunConfig parse_config_text(const std::string& text, Command command) {
  KeyMap keys(text);
  RunConfig cfg;

  cfg.geometry_kind = keys.str("geometry.kind");
  if (cfg.geometry_kind != "straight" && cfg.geometry_kind != "sinusoidal") {
    fail("geometry.kind must be straight or sinusoidal");
  }
  if (cfg.geometry_kind == "sinusoidal") {
    cfg.amplitude = keys.num("geometry.amplitude");
    cfg.period = keys.num("geometry.period");
    if (!(cfg.amplitude >= 0.0 && cfg.amplitude < 1.0)) {
      fail("geometry.amplitude must lie in [0, 1)");
    }
    if (!(cfg.period > 0.0)) fail("geometry.period must be positive");
  }

  cfg.half_length = keys.num("domain.L");
  if (!(cfg.half_length > 0.0)) fail("domain.L must be positive");
  cfg.nx = keys.integer("mesh.nx");
  cfg.nt = keys.integer("mesh.nt");
  if (cfg.nx < 2 || cfg.nt < 2) fail("mesh.nx and mesh.nt must be >= 2");

  cfg.gas_kind = keys.str("gas.kind");
  if (cfg.gas_kind != "polytropic" && cfg.gas_kind != "isothermal") {
    fail("gas.kind must be polytropic or isothermal");
  }
  if (cfg.gas_kind == "polytropic") {
    cfg.gamma = keys.num("gas.gamma");
    if (!(cfg.gamma > 1.0)) fail("gas.gamma must exceed 1");
  }

  cfg.theta = keys.num("cutoff.theta");
  cfg.eps0 = keys.num("cutoff.eps0");
  if (!(cfg.theta > 0.0 && cfg.theta < 1.0)) {
    fail("cutoff.theta must lie in (0, 1)");
  }
  if (!(cfg.eps0 > 0.0 && cfg.eps0 < 1.0)) {
    fail("cutoff.eps0 must lie in (0, 1)");
  }

  cfg.m = keys.num("flow.m");

  cfg.force_kind = keys.str_or("force.kind", "zero");
  if (cfg.force_kind == "linear") {
    cfg.force_g = keys.num("force.g");
  } else if (cfg.force_kind == "bump") {
    cfg.force_height = keys.num("force.height");
    cfg.force_center_t = keys.num("force.center_t");
    cfg.force_center_z = keys.num("force.center_z");
    cfg.force_width = keys.num("force.width");
    if (!(cfg.force_height >= 0.0)) fail("force.height must be >= 0");
    if (!(cfg.force_width > 0.0)) fail("force.width must be positive");
  } else if (cfg.force_kind != "zero") {
    fail("force.kind must be zero, linear or bump");
  }

  if (command == Command::solve_compressible) {
    cfg.eps = keys.num("eps");
    if (!(cfg.eps > 0.0 && cfg.eps <= cfg.eps0)) {
      fail("eps must lie in (0, cutoff.eps0]");
    }
  } else if (keys.has("eps")) {
    cfg.eps = keys.num("eps");
  }

  if (command == Command::sweep_eps) {
    cfg.eps_list = keys.list("eps_list");
    for (std::size_t i = 0; i + 1 < cfg.eps_list.size(); ++i) {
      if (!(cfg.eps_list[i] > cfg.eps_list[i + 1])) {
        fail("eps_list must be strictly decreasing");
      }
    }
    for (double e : cfg.eps_list) {
      if (!(e > 0.0 && e <= cfg.eps0)) {
        fail("eps_list entries must lie in (0, cutoff.eps0]");
      }
    }
  } else if (keys.has("eps_list")) {
    cfg.eps_list = keys.list("eps_list");
  }

  if (command == Command::sweep_L) {
    cfg.L_list = keys.list("L_list");
    for (std::size_t i = 0; i + 1 < cfg.L_list.size(); ++i) {
      if (!(cfg.L_list[i] < cfg.L_list[i + 1])) {
        fail("L_list must be strictly increasing");
      }
    }
  } else if (keys.has("L_list")) {
    cfg.L_list = keys.list("L_list");
  }

  cfg.window_a = keys.num_or("sweep.window_a", -2.0);
  cfg.window_b = keys.num_or("sweep.window_b", 2.0);
  if (!(cfg.window_a < cfg.window_b)) {
    fail("sweep.window_a must be below sweep.window_b");
  }

  cfg.cg_tol = keys.num_or("solver.cg_tol", 1e-12);
  cfg.picard_tol = keys.num_or("solver.picard_tol", 1e-10);
  cfg.max_picard = keys.integer_or("solver.max_picard", 500);
  if (!(cfg.cg_tol > 0.0 && cfg.cg_tol < 1.0)) {
    fail("solver.cg_tol must lie in (0, 1)");
  }
  if (!(cfg.picard_tol > 0.0)) fail("solver.picard_tol must be positive");
  if (cfg.max_picard < 1) fail("solver.max_picard must be >= 1");

  cfg.output_dir = keys.str_or("output.dir", "out");

  keys.reject_unknown();
  return cfg;
}

RunConfig parse_config(const std::string& path, Command command) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str(), command);
}

}  // namespace machzero
