#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "machzero/acceptance.hpp"
#include "machzero/compressible.hpp"
#include "machzero/incompressible.hpp"

using namespace machzero;

namespace {

struct StraightSetup {
  Mesh mesh = build_mesh(NozzleMap::straight(), 2.0, 12, 6);
  GasLaw gas = GasLaw::polytropic(2.0);
  SubsonicCutoff cutoff = SubsonicCutoff::make(gas, 0.5, 0.1);
  ForceField force = force_potential_field(ForcePotential::zero(), mesh);
};

}  // namespace

TEST_CASE("straight nozzle matches the 1D duct root") {
  StraightSetup s;
  const double eps = 0.1;
  const CompressibleSolve sol =
      solve_compressible(s.mesh, s.cutoff, eps, 1.0, s.force);
  const DuctOracle oracle = uniform_duct_oracle(s.cutoff, eps, 0.5);
  CHECK(oracle.speed == doctest::Approx(0.500313).epsilon(2e-6));
  CHECK(oracle.density == doctest::Approx(0.999374).epsilon(2e-6));

  const FlowState state =
      compressible_state(sol.potential, s.cutoff, eps, s.force);
  CHECK_FALSE(state.modified_flow);
  for (int q = 0; q < s.mesh.n_quad(); ++q) {
    const auto& u = state.velocity[q];
    const double speed = std::sqrt(u[0] * u[0] + u[1] * u[1]);
    CHECK(speed == doctest::Approx(oracle.speed).epsilon(1e-9));
    CHECK(state.density[q] == doctest::Approx(oracle.density).epsilon(1e-9));
    CHECK(state.mach_number[q] ==
          doctest::Approx(0.035389).epsilon(1e-4));
  }
}

TEST_CASE("small-eps solutions approach the incompressible one at order 2") {
  StraightSetup s;
  const IncompressibleSolve base = solve_incompressible(s.mesh, 1.0);
  double prev_err = -1.0, prev_eps = 0.0;
  for (double eps : {0.1, 0.05, 0.025}) {
    const CompressibleSolve sol =
        solve_compressible(s.mesh, s.cutoff, eps, 1.0, s.force);
    const auto g = gradients_at_quad(sol.potential);
    const auto gb = gradients_at_quad(base.potential);
    double err = 0.0;
    for (int q = 0; q < s.mesh.n_quad(); ++q) {
      const double dt = g[q][0] - gb[q][0];
      const double dz = g[q][1] - gb[q][1];
      err = std::max(err, std::sqrt(dt * dt + dz * dz));
    }
    // 1D expansion: q - 1/2 = eps^2 / 32 + O(eps^4)
    CHECK(err == doctest::Approx(eps * eps / 32.0).epsilon(2e-2));
    if (prev_err > 0.0) {
      const double order = std::log(prev_err / err) /
                           std::log(prev_eps / eps);
      CHECK(order == doctest::Approx(2.0).epsilon(0.02));
    }
    prev_err = err;
    prev_eps = eps;
  }
}

TEST_CASE("zero flux converges immediately to the zero potential") {
  StraightSetup s;
  const CompressibleSolve sol =
      solve_compressible(s.mesh, s.cutoff, 0.1, 0.0, s.force);
  CHECK(sol.iterations == 1);
  for (double v : sol.potential.values) CHECK(v == 0.0);
  const FlowState state =
      compressible_state(sol.potential, s.cutoff, 0.1, s.force);
  for (int q = 0; q < s.mesh.n_quad(); ++q) {
    CHECK(state.density[q] == 1.0);
    CHECK(state.pressure[q] == 0.0);
    CHECK(state.mach_number[q] == 0.0);
  }
}

TEST_CASE("weak-form residual of the converged solution is small") {
  const Mesh mesh = build_mesh(NozzleMap::sinusoidal(0.2, 4.0), 4.0, 48, 12);
  const GasLaw gas = GasLaw::polytropic(1.4);
  const SubsonicCutoff cutoff = SubsonicCutoff::make(gas, 0.5, 0.2);
  const ForceField force =
      force_potential_field(ForcePotential::zero(), mesh);
  const CompressibleSolve sol =
      solve_compressible(mesh, cutoff, 0.2, 1.0, force);

  const std::vector<double> action =
      apply_weighted_stiffness(mesh, sol.weights, sol.potential.values);
  const std::vector<double> load = outlet_flux_load(mesh, 1.0);
  double bmax = 0.0;
  for (double v : load) bmax = std::max(bmax, std::abs(v));
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    if (sol.potential.dirichlet[i]) continue;
    CHECK(std::abs(action[i] - load[i]) <= 1e-9 * bmax);
  }

  // mass flux equals m through every section in residual mode
  for (double a : {-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0}) {
    const double f = flux_residual_mode(sol.potential, sol.weights,
                                        cross_section_facets(mesh, a));
    CHECK(f == doctest::Approx(1.0).epsilon(1e-10));
  }

  // Mach consistency: max Mach below theta iff max speed below the
  // Mach-theta speed
  const FlowState state =
      compressible_state(sol.potential, cutoff, 0.2, force);
  double mach_max = 0.0, speed_max = 0.0;
  for (int q = 0; q < mesh.n_quad(); ++q) {
    mach_max = std::max(mach_max, state.mach_number[q]);
    const auto& u = state.velocity[q];
    speed_max = std::max(speed_max, std::hypot(u[0], u[1]));
  }
  const double q_theta = speed_at_mach(gas, 0.2, 0.5, 0.0);
  CHECK(mach_max < 0.5);
  CHECK(speed_max < q_theta);

  // functional history is non-increasing after the first step
  for (std::size_t k = 2; k < sol.functional_history.size(); ++k) {
    CHECK(sol.functional_history[k] <=
          sol.functional_history[k - 1] + 1e-12);
  }
  CHECK(sol.warnings.empty());
}

TEST_CASE("cutoff inactivity check") {
  StraightSetup s;

  SUBCASE("incompressible solution is far below the knot") {
    const IncompressibleSolve base = solve_incompressible(s.mesh, 1.0);
    const CutoffCheck check =
        check_cutoff_inactive(base.potential, s.cutoff, s.force);
    CHECK(check.inactive);
    CHECK(check.max_ratio == doctest::Approx(0.075).epsilon(1e-2));
  }

  SUBCASE("an artificial fast field activates the truncation") {
    ScalarField fast = make_field(s.mesh);
    const double speed = 2.0 * s.cutoff.knot_speed(0.0);
    for (int i = 0; i < s.mesh.n_nodes(); ++i) {
      fast.values[i] = speed * s.mesh.nodes[i][1];
    }
    const CutoffCheck check = check_cutoff_inactive(fast, s.cutoff, s.force);
    CHECK_FALSE(check.inactive);
    CHECK(check.max_ratio == doctest::Approx(2.0).epsilon(1e-9));
    const FlowState state =
        compressible_state(fast, s.cutoff, 0.1, s.force);
    CHECK(state.modified_flow);
  }

  SUBCASE("margin shrinks with eps") {
    double prev = 1e300;
    for (double eps : {0.1, 0.05, 0.025}) {
      const CompressibleSolve sol =
          solve_compressible(s.mesh, s.cutoff, eps, 1.0, s.force);
      const double ratio =
          check_cutoff_inactive(sol.potential, s.cutoff, s.force).max_ratio;
      CHECK(ratio <= prev + 1e-9);
      prev = ratio;
    }
  }
}

TEST_CASE("empirical subsonic threshold") {
  SUBCASE("zero flux keeps the whole range subsonic") {
    StraightSetup s;
    const EpsThreshold t = find_eps_c(s.mesh, s.cutoff, 0.0, s.force);
    CHECK(t.threshold == doctest::Approx(0.1).epsilon(1e-12));
  }

  SUBCASE("moderate flux keeps the whole range subsonic") {
    StraightSetup s;
    const EpsThreshold t = find_eps_c(s.mesh, s.cutoff, 1.0, s.force);
    CHECK(t.threshold == doctest::Approx(0.1).epsilon(1e-12));
    for (const auto& pt : t.curve) {
      const DuctOracle oracle = uniform_duct_oracle(s.cutoff, pt.eps, 0.5);
      CHECK(pt.mach_max ==
            doctest::Approx(oracle.mach_number).epsilon(1e-6));
    }
  }

  SUBCASE("a flux that chokes at eps0 pushes the threshold below it") {
    const Mesh mesh = build_mesh(NozzleMap::straight(), 2.0, 12, 6);
    const GasLaw gas = GasLaw::polytropic(2.0);
    const SubsonicCutoff cutoff = SubsonicCutoff::make(gas, 0.5, 0.3);
    const ForceField force =
        force_potential_field(ForcePotential::zero(), mesh);
    const double m = 4.4;  // flux density 2.2 exceeds Mach 0.5 at eps = 0.3
    const EpsThreshold t = find_eps_c(mesh, cutoff, m, force);
    CHECK(t.threshold < 0.3);
    CHECK(t.threshold > 0.0);

    // oracle reference: the largest eps with speed below the knot
    const double knot = cutoff.knot_speed(0.0);
    double lo = 0.0, hi = 0.3;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      const DuctOracle oracle = uniform_duct_oracle(cutoff, mid, 2.2, true);
      (oracle.speed < knot ? lo : hi) = mid;
    }
    CHECK(std::abs(t.threshold - lo) <= 2e-3);
  }
}

TEST_CASE("uniqueness probe and untruncated re-step") {
  StraightSetup s;
  CHECK(uniqueness_probe_compressible(s.mesh, s.cutoff, 0.1, 1.0, s.force) <=
        1e-9);

  const Mesh wavy = build_mesh(NozzleMap::sinusoidal(0.2, 4.0), 4.0, 32, 8);
  const GasLaw gas = GasLaw::polytropic(1.4);
  const SubsonicCutoff cutoff = SubsonicCutoff::make(gas, 0.5, 0.2);
  const ForceField force =
      force_potential_field(ForcePotential::zero(), wavy);
  CHECK(uniqueness_probe_compressible(wavy, cutoff, 0.2, 1.0, force) <= 1e-9);

  const CompressibleSolve sol =
      solve_compressible(wavy, cutoff, 0.2, 1.0, force);
  CHECK(untruncated_restep_delta(wavy, cutoff, 0.2, 1.0, force,
                                 sol.potential) <= 1e-10);
}

TEST_CASE("iteration-starved solve reports contraction history") {
  StraightSetup s;
  PicardOptions opts;
  opts.max_iterations = 1;
  opts.picard_tol = 1e-16;
  CHECK_THROWS_WITH_AS(
      solve_compressible(s.mesh, s.cutoff, 0.1, 1.0, s.force, opts),
      doctest::Contains("contraction"), std::runtime_error);
}

TEST_CASE("comparison functional optimality at the solution") {
  const Mesh mesh = build_mesh(NozzleMap::sinusoidal(0.2, 4.0), 2.0, 24, 8);
  const GasLaw gas = GasLaw::polytropic(1.4);
  const SubsonicCutoff cutoff = SubsonicCutoff::make(gas, 0.5, 0.2);
  const ForceField force =
      force_potential_field(ForcePotential::zero(), mesh);
  const double eps = 0.1;

  const IncompressibleSolve base = solve_incompressible(mesh, 1.0);
  const CompressibleSolve sol =
      solve_compressible(mesh, cutoff, eps, 1.0, force);
  const double i_min =
      functional_I(sol.potential, base.potential, cutoff, eps, force.value);

  std::mt19937 rng(5);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    ScalarField competitor = base.potential;
    for (int i = 0; i < mesh.n_nodes(); ++i) {
      if (!competitor.dirichlet[i]) {
        competitor.values[i] += eps * eps * unif(rng);
      }
    }
    CHECK(functional_I(competitor, base.potential, cutoff, eps, force.value) >
          i_min);
  }

  // ellipticity at the solution: the same eigenvalue floor holds at every
  // compressibility in the sweep
  for (double e : {0.2, 0.1, 0.05}) {
    const CompressibleSolve run =
        solve_compressible(mesh, cutoff, e, 1.0, force);
    const auto grads = gradients_at_quad(run.potential);
    double min_eig = 1e300;
    for (int q = 0; q < mesh.n_quad(); ++q) {
      const HatCoefficients h = hat_coefficients(
          cutoff, e, {grads[q][0], grads[q][1]}, force.value[q],
          {force.grad[q][0], force.grad[q][1]});
      const double tr = h.a[0][0] + h.a[1][1];
      const double disc =
          std::sqrt((h.a[0][0] - h.a[1][1]) * (h.a[0][0] - h.a[1][1]) +
                    4.0 * h.a[0][1] * h.a[1][0]);
      min_eig = std::min(min_eig, 0.5 * (tr - disc));
    }
    CHECK(min_eig >= 0.5);
  }
}

TEST_CASE("coercivity bounds of the comparison functional") {
  // I is squeezed between quadratic forms built from the eigenvalue range
  // of the truncated coefficients along the segment between the states.
  const Mesh mesh = build_mesh(NozzleMap::sinusoidal(0.1, 2.0), 1.0, 8, 4);
  const GasLaw gas = GasLaw::polytropic(2.0);
  const SubsonicCutoff cutoff = SubsonicCutoff::make(gas, 0.5, 0.2);
  const std::vector<double> phi_f(mesh.n_quad(), 0.0);
  const double eps = 0.1;

  const IncompressibleSolve base = solve_incompressible(mesh, 1.0);
  const auto gb = gradients_at_quad(base.potential);
  double norm_ref = 0.0, c_small = 0.0;
  for (int q = 0; q < mesh.n_quad(); ++q) {
    const double lam_ref = gb[q][0] * gb[q][0] + gb[q][1] * gb[q][1];
    norm_ref += mesh.quad[q].weight * lam_ref;
    c_small = std::max(
        c_small,
        std::abs(cutoff.density(eps, lam_ref, 0.0) - 1.0) / (eps * eps));
  }

  std::mt19937 rng(17);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    ScalarField field = base.potential;
    for (int i = 0; i < mesh.n_nodes(); ++i) {
      if (!field.dirichlet[i]) {
        field.values[i] += eps * eps * 0.5 * unif(rng);
      }
    }
    const auto g = gradients_at_quad(field);
    double tilde_norm = 0.0;
    double lam_min = 1e300, lam_max = 0.0;
    for (int q = 0; q < mesh.n_quad(); ++q) {
      const double dt = (g[q][0] - gb[q][0]) / (eps * eps);
      const double dz = (g[q][1] - gb[q][1]) / (eps * eps);
      tilde_norm += mesh.quad[q].weight * (dt * dt + dz * dz);
      for (int s = 0; s <= 10; ++s) {
        const double t = s / 10.0;
        const std::array<double, 2> mix = {
            t * g[q][0] + (1 - t) * gb[q][0],
            t * g[q][1] + (1 - t) * gb[q][1]};
        const HatCoefficients h =
            hat_coefficients(cutoff, eps, mix, 0.0, {0.0, 0.0});
        const double tr = h.a[0][0] + h.a[1][1];
        const double disc =
            std::sqrt((h.a[0][0] - h.a[1][1]) * (h.a[0][0] - h.a[1][1]) +
                      4.0 * h.a[0][1] * h.a[1][0]);
        lam_min = std::min(lam_min, 0.5 * (tr - disc));
        lam_max = std::max(lam_max, 0.5 * (tr + disc));
      }
    }
    lam_min *= 0.99;
    lam_max *= 1.01;
    // I splits into a segment-integrated quadratic form within
    // [lam_min/2, lam_max/2] of |grad tilde|^2 and a cross term bounded via
    // Young's inequality with weight lam_min/2.
    const double value =
        functional_I(field, base.potential, cutoff, eps, phi_f);
    const double cross = c_small * c_small / lam_min * norm_ref;
    CHECK(value >= 0.25 * lam_min * tilde_norm - cross);
    CHECK(value <= (0.5 * lam_max + 0.25 * lam_min) * tilde_norm + cross);
  }
}
