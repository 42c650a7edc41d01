#include "machzero/incompressible.hpp"

#include <cmath>
#include <random>

namespace machzero {

IncompressibleSolve solve_incompressible(const Mesh& mesh, double m,
                                         double cg_tol) {
  LinearSystem sys = assemble_weighted_stiffness(mesh, {});
  sys.rhs = outlet_flux_load(mesh, m);
  SolveResult sol = solve_spd(sys, mesh, cg_tol);

  IncompressibleSolve out;
  out.potential = std::move(sol.field);
  out.cg_iterations = sol.iterations;
  if (m != 0.0) {
    double energy = 0.0, vol = 0.0;
    const auto grads = gradients_at_quad(out.potential);
    for (int q = 0; q < mesh.n_quad(); ++q) {
      energy += mesh.quad[q].weight *
                (grads[q][0] * grads[q][0] + grads[q][1] * grads[q][1]);
      vol += mesh.quad[q].weight;
    }
    out.energy_constant = energy / vol / (m * m);
  }
  return out;
}

FlowState incompressible_state(const ScalarField& potential,
                               const ForcePotential& fp) {
  const Mesh& mesh = *potential.mesh;
  FlowState state;
  state.velocity = gradients_at_quad(potential);
  state.density.assign(mesh.n_quad(), 1.0);
  state.mach_number.assign(mesh.n_quad(), 0.0);
  state.pressure.resize(mesh.n_quad());
  for (int q = 0; q < mesh.n_quad(); ++q) {
    const auto& u = state.velocity[q];
    const auto& pos = mesh.quad[q].pos;
    state.pressure[q] =
        fp.value(pos[0], pos[1]) - 0.5 * (u[0] * u[0] + u[1] * u[1]);
  }
  return state;
}

double uniqueness_probe_incompressible(const Mesh& mesh, double m,
                                       double cg_tol) {
  LinearSystem sys = assemble_weighted_stiffness(mesh, {});
  sys.rhs = outlet_flux_load(mesh, m);
  SolveResult a = solve_spd(sys, mesh, cg_tol);

  std::mt19937 rng(0x5eed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<double> start(mesh.n_nodes());
  for (double& v : start) v = unif(rng);
  SolveResult b = solve_spd(sys, mesh, cg_tol, &start);

  const auto ga = gradients_at_quad(a.field);
  const auto gb = gradients_at_quad(b.field);
  double worst = 0.0;
  for (int q = 0; q < mesh.n_quad(); ++q) {
    const double dt = ga[q][0] - gb[q][0];
    const double dz = ga[q][1] - gb[q][1];
    worst = std::max(worst, std::sqrt(dt * dt + dz * dz));
  }
  return worst;
}

}  // namespace machzero
