#ifndef MACHZERO_ACCEPTANCE_HPP_
#define MACHZERO_ACCEPTANCE_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "machzero/cutoff.hpp"

namespace machzero {

/// Uniform flow in a constant-width duct: the subsonic root of
/// rho(q^2) q = flux_per_area at phi_f = 0, found by bisection.  This is the
/// independent 1D reference the solver checks against on straight nozzles.
struct DuctOracle {
  double speed = 0.0;
  double density = 0.0;
  double mach_number = 0.0;
};

/// With truncated = false the physical Bernoulli density is used and the
/// root is sought below the critical speed (throws std::runtime_error when
/// the duct chokes); with truncated = true the cutoff density is used and
/// the equation is always solvable.
DuctOracle uniform_duct_oracle(const SubsonicCutoff& cutoff, double eps,
                               double flux_per_area, bool truncated = false);

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

struct AcceptanceReport {
  std::vector<CriterionResult> results;
  bool all_pass = false;
};

/// Runs the complete verification suite and prints one pass/fail line per
/// criterion to `log` as it goes.
AcceptanceReport run_acceptance(std::ostream& log);

}  // namespace machzero

#endif  // MACHZERO_ACCEPTANCE_HPP_
