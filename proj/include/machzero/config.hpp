#ifndef MACHZERO_CONFIG_HPP_
#define MACHZERO_CONFIG_HPP_

#include <string>
#include <vector>

#include "machzero/compressible.hpp"
#include "machzero/force.hpp"
#include "machzero/gas.hpp"
#include "machzero/geometry.hpp"

namespace machzero {

enum class Command {
  solve_incompressible,
  solve_compressible,
  sweep_eps,
  sweep_L,
  check,
};

/// Flat key-value run configuration (dotted section names, one `key = value`
/// per line, `#` comments).  The schema is strict: unknown keys are rejected
/// and missing required keys are reported by name.
struct RunConfig {
  std::string geometry_kind;  // straight | sinusoidal
  double amplitude = 0.0;
  double period = 1.0;
  double half_length = 0.0;  // domain.L
  int nx = 0;
  int nt = 0;
  std::string gas_kind;  // polytropic | isothermal
  double gamma = 0.0;
  double theta = 0.0;
  double eps0 = 0.0;
  double m = 0.0;
  std::string force_kind = "zero";  // zero | linear | bump
  double force_g = 0.0;
  double force_height = 0.0;
  double force_center_t = 0.0;
  double force_center_z = 0.0;
  double force_width = 1.0;
  double eps = 0.0;
  std::vector<double> eps_list;
  std::vector<double> L_list;
  double window_a = -2.0;
  double window_b = 2.0;
  double cg_tol = 1e-12;
  double picard_tol = 1e-10;
  int max_picard = 500;
  std::string output_dir = "out";

  NozzleMap make_map() const;
  GasLaw make_gas() const;
  ForcePotential make_force() const;
  PicardOptions make_picard_options() const;
};

/// Parses and validates a configuration for the given command.  Throws
/// std::runtime_error naming the offending key on schema violations.
RunConfig parse_config(const std::string& path, Command command);

/// Parses from text instead of a file (testing convenience).
RunConfig parse_config_text(const std::string& text, Command command);

}  // namespace machzero

#endif  // MACHZERO_CONFIG_HPP_
