#ifndef MACHZERO_INCOMPRESSIBLE_HPP_
#define MACHZERO_INCOMPRESSIBLE_HPP_

#include "machzero/fem.hpp"
#include "machzero/flow_state.hpp"

namespace machzero {

struct IncompressibleSolve {
  ScalarField potential;
  int cg_iterations = 0;
  /// Discrete energy-bound constant (1/|Omega_L|) int |grad phi|^2 / m^2
  /// (zero when m = 0).
  double energy_constant = 0.0;
};

/// Solves the truncated incompressible potential problem: Laplace equation
/// with zero inlet potential, slip walls, and the uniform outlet flux
/// m / |S_L^+|.  The potential never reads the force potential; only the
/// pressure reconstruction does.
IncompressibleSolve solve_incompressible(const Mesh& mesh, double m,
                                         double cg_tol = 1e-12);

/// Velocity u = grad(phi), density 1, Bernoulli pressure
/// p = phi_f - |u|^2 / 2, Mach 0.
FlowState incompressible_state(const ScalarField& potential,
                               const ForcePotential& fp);

/// Max quadrature-point gradient discrepancy between two solves started
/// from different conjugate-gradient initial guesses.
double uniqueness_probe_incompressible(const Mesh& mesh, double m,
                                       double cg_tol = 1e-12);

}  // namespace machzero

#endif  // MACHZERO_INCOMPRESSIBLE_HPP_
