#ifndef MACHZERO_COMPRESSIBLE_HPP_
#define MACHZERO_COMPRESSIBLE_HPP_

#include <string>
#include <vector>

#include "machzero/fem.hpp"
#include "machzero/flow_state.hpp"

namespace machzero {

struct PicardOptions {
  double cg_tol = 1e-12;
  double picard_tol = 1e-10;      // on the max quadrature gradient change
  int max_iterations = 500;
  double functional_slack = 1e-12;
  int max_halvings = 5;
};

struct CompressibleSolve {
  ScalarField potential;
  int iterations = 0;
  std::vector<double> functional_history;  // I at each accepted iterate
  std::vector<double> weights;             // final rhohat per quadrature point
  int total_cg_iterations = 0;
  std::vector<std::string> warnings;
};

/// Solves the truncated compressible potential problem by Picard iteration
/// on the weighted stiffness form: freeze rhohat at the current gradients,
/// assemble, re-apply the fixed outlet flux load, solve, repeat until the
/// max quadrature-point gradient change drops below picard_tol.  The
/// functional I is tracked each step; a step that increases it is halved up
/// to max_halvings times and flagged with a warning if the increase
/// survives.  init defaults to the incompressible solution.
CompressibleSolve solve_compressible(const Mesh& mesh,
                                     const SubsonicCutoff& cutoff, double eps,
                                     double m, const ForceField& force,
                                     const PicardOptions& opts = {},
                                     const ScalarField* init = nullptr);

/// Derives (u, rho, p, M) from a potential.  Wherever the speed stays on the
/// identity branch of the truncation the physical Bernoulli density is used
/// (identical to the truncated one there); if any point leaves the branch
/// the state is tagged modified_flow and uses the truncated density.
FlowState compressible_state(const ScalarField& potential,
                             const SubsonicCutoff& cutoff, double eps,
                             const ForceField& force);

struct CutoffCheck {
  bool inactive = false;
  double max_ratio = 0.0;  // max |grad phi| / knot speed over qps
};

CutoffCheck check_cutoff_inactive(const ScalarField& potential,
                                  const SubsonicCutoff& cutoff,
                                  const ForceField& force);

struct EpsThresholdPoint {
  double eps = 0.0;
  double mach_max = 0.0;
  double cutoff_margin = 0.0;
  bool converged = false;
  bool subsonic = false;  // cutoff inactive and mach_max < 1
};

struct EpsThreshold {
  double threshold = 0.0;  // largest tested eps with a clean subsonic solve
  std::vector<EpsThresholdPoint> curve;  // ascending in eps
  std::string note;
};

/// Empirical subsonic threshold: bisects eps over (0, eps0] to 1e-3
/// resolution, warm-starting from the incompressible solution, and records
/// the mach_max curve at the tested points.
EpsThreshold find_eps_c(const Mesh& mesh, const SubsonicCutoff& cutoff,
                        double m, const ForceField& force,
                        const PicardOptions& opts = {});

/// Max gradient discrepancy between Picard runs initialized from the
/// incompressible solution and from zero.
double uniqueness_probe_compressible(const Mesh& mesh,
                                     const SubsonicCutoff& cutoff, double eps,
                                     double m, const ForceField& force,
                                     const PicardOptions& opts = {});

/// One extra Picard step with the physical (untruncated) Bernoulli density
/// frozen at the given solution; returns the max gradient change.  For a
/// converged solution on the identity branch this must stay within the
/// Picard tolerance.
double untruncated_restep_delta(const Mesh& mesh, const SubsonicCutoff& cutoff,
                                double eps, double m, const ForceField& force,
                                const ScalarField& solution,
                                double cg_tol = 1e-12);

}  // namespace machzero

#endif  // MACHZERO_COMPRESSIBLE_HPP_
