#include "machzero/compressible.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "machzero/incompressible.hpp"

namespace machzero {

namespace {

std::vector<double> truncated_weights(const Mesh& mesh,
                                      const SubsonicCutoff& cutoff, double eps,
                                      const ForceField& force,
                                      const std::vector<Point2>& grads) {
  std::vector<double> w(mesh.n_quad());
  for (int q = 0; q < mesh.n_quad(); ++q) {
    const double q2 = grads[q][0] * grads[q][0] + grads[q][1] * grads[q][1];
    w[q] = cutoff.density(eps, q2, force.value[q]);
  }
  return w;
}

double max_grad_change(const std::vector<Point2>& a,
                       const std::vector<Point2>& b) {
  double worst = 0.0;
  for (std::size_t q = 0; q < a.size(); ++q) {
    const double dt = a[q][0] - b[q][0];
    const double dz = a[q][1] - b[q][1];
    worst = std::max(worst, std::sqrt(dt * dt + dz * dz));
  }
  return worst;
}

}  // namespace

CompressibleSolve solve_compressible(const Mesh& mesh,
                                     const SubsonicCutoff& cutoff, double eps,
                                     double m, const ForceField& force,
                                     const PicardOptions& opts,
                                     const ScalarField* init) {
  if (!(eps > 0.0 && eps <= cutoff.eps0())) {
    std::ostringstream msg;
    msg << "solve_compressible: eps = " << eps << " outside (0, "
        << cutoff.eps0() << "]";
    throw std::domain_error(msg.str());
  }

  // The incompressible solution is both the default start and the reference
  // state of the comparison functional.
  IncompressibleSolve base = solve_incompressible(mesh, m, opts.cg_tol);
  const ScalarField& reference = base.potential;

  CompressibleSolve out;
  out.potential = (init != nullptr) ? *init : reference;
  const std::vector<double> load = outlet_flux_load(mesh, m);

  std::vector<Point2> grads = gradients_at_quad(out.potential);
  double functional_prev =
      functional_I(out.potential, reference, cutoff, eps, force.value);
  out.functional_history.push_back(functional_prev);

  std::vector<double> deltas;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    LinearSystem sys = assemble_weighted_stiffness(
        mesh, truncated_weights(mesh, cutoff, eps, force, grads));
    sys.rhs = load;
    SolveResult lin = solve_spd(sys, mesh, opts.cg_tol, &out.potential.values);
    out.total_cg_iterations += lin.iterations;

    ScalarField candidate = std::move(lin.field);
    double functional =
        functional_I(candidate, reference, cutoff, eps, force.value);
    for (int h = 0; h < opts.max_halvings &&
                    functional > functional_prev + opts.functional_slack;
         ++h) {
      for (int i = 0; i < mesh.n_nodes(); ++i) {
        candidate.values[i] =
            0.5 * (candidate.values[i] + out.potential.values[i]);
      }
      functional =
          functional_I(candidate, reference, cutoff, eps, force.value);
    }
    if (functional > functional_prev + opts.functional_slack) {
      std::ostringstream msg;
      msg << "functional increased by " << functional - functional_prev
          << " at step " << it;
      out.warnings.push_back(msg.str());
    }

    std::vector<Point2> new_grads = gradients_at_quad(candidate);
    const double delta = max_grad_change(new_grads, grads);
    deltas.push_back(delta);

    out.potential = std::move(candidate);
    grads = std::move(new_grads);
    functional_prev = functional;
    out.functional_history.push_back(functional);
    out.iterations = it;

    if (delta <= opts.picard_tol) {
      out.weights = truncated_weights(mesh, cutoff, eps, force, grads);
      return out;
    }
  }

  std::ostringstream msg;
  msg << "solve_compressible: no convergence in " << opts.max_iterations
      << " iterations; contraction ratios:";
  for (std::size_t i = 1; i < deltas.size(); ++i) {
    if (i + 6 > deltas.size() || i < 3) {
      msg << " " << deltas[i] / std::max(deltas[i - 1], 1e-300);
    } else if (i == 3) {
      msg << " ...";
    }
  }
  throw std::runtime_error(msg.str());
}

FlowState compressible_state(const ScalarField& potential,
                             const SubsonicCutoff& cutoff, double eps,
                             const ForceField& force) {
  const Mesh& mesh = *potential.mesh;
  const GasLaw& gas = cutoff.gas_law();
  FlowState state;
  state.velocity = gradients_at_quad(potential);
  state.density.resize(mesh.n_quad());
  state.pressure.resize(mesh.n_quad());
  state.mach_number.resize(mesh.n_quad());
  for (int q = 0; q < mesh.n_quad(); ++q) {
    const auto& u = state.velocity[q];
    const double q2 = u[0] * u[0] + u[1] * u[1];
    const double phi = force.value[q];
    double rho;
    if (q2 <= cutoff.knot_speed_sq(phi)) {
      rho = density_from_speed(gas, eps, q2, phi);
    } else {
      state.modified_flow = true;
      rho = cutoff.density(eps, q2, phi);
    }
    state.density[q] = rho;
    state.pressure[q] = rescaled_pressure(gas, eps, rho);
    state.mach_number[q] = mach(gas, eps, std::sqrt(q2), rho);
  }
  return state;
}

CutoffCheck check_cutoff_inactive(const ScalarField& potential,
                                  const SubsonicCutoff& cutoff,
                                  const ForceField& force) {
  const auto grads = gradients_at_quad(potential);
  CutoffCheck check;
  for (std::size_t q = 0; q < grads.size(); ++q) {
    const double speed = std::sqrt(grads[q][0] * grads[q][0] +
                                   grads[q][1] * grads[q][1]);
    check.max_ratio = std::max(
        check.max_ratio, speed / cutoff.knot_speed(force.value[q]));
  }
  check.inactive = check.max_ratio < 1.0;
  return check;
}

EpsThreshold find_eps_c(const Mesh& mesh, const SubsonicCutoff& cutoff,
                        double m, const ForceField& force,
                        const PicardOptions& opts) {
  EpsThreshold result;

  auto probe = [&](double eps) {
    EpsThresholdPoint pt;
    pt.eps = eps;
    try {
      CompressibleSolve sol =
          solve_compressible(mesh, cutoff, eps, m, force, opts);
      pt.converged = true;
      const FlowState state =
          compressible_state(sol.potential, cutoff, eps, force);
      pt.mach_max = 0.0;
      for (double mm : state.mach_number) pt.mach_max = std::max(pt.mach_max, mm);
      pt.cutoff_margin = check_cutoff_inactive(sol.potential, cutoff, force)
                             .max_ratio;
      pt.subsonic = pt.cutoff_margin < 1.0 && pt.mach_max < 1.0;
    } catch (const std::runtime_error&) {
      pt.converged = false;
      pt.subsonic = false;
    }
    result.curve.push_back(pt);
    return pt.subsonic;
  };

  const double eps0 = cutoff.eps0();
  if (probe(eps0)) {
    result.threshold = eps0;
    result.note = "entire range subsonic";
  } else {
    double lo = 0.0, hi = eps0;
    bool found = false;
    double trial = eps0 / 2.0;
    for (int k = 0; k < 12 && !found; ++k, trial /= 2.0) {
      if (probe(trial)) {
        lo = trial;
        found = true;
      } else {
        hi = trial;
      }
    }
    if (!found) {
      result.threshold = 0.0;
      result.note = "no subsonic eps found in range";
    } else {
      while (hi - lo > 1e-3) {
        const double mid = 0.5 * (lo + hi);
        if (probe(mid)) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      result.threshold = lo;
      result.note = "threshold below eps0";
    }
  }
  std::sort(result.curve.begin(), result.curve.end(),
            [](const EpsThresholdPoint& a, const EpsThresholdPoint& b) {
              return a.eps < b.eps;
            });
  return result;
}

double uniqueness_probe_compressible(const Mesh& mesh,
                                     const SubsonicCutoff& cutoff, double eps,
                                     double m, const ForceField& force,
                                     const PicardOptions& opts) {
  CompressibleSolve warm = solve_compressible(mesh, cutoff, eps, m, force,
                                              opts, nullptr);
  ScalarField zero_start = make_field(mesh);
  CompressibleSolve cold = solve_compressible(mesh, cutoff, eps, m, force,
                                              opts, &zero_start);
  const auto ga = gradients_at_quad(warm.potential);
  const auto gb = gradients_at_quad(cold.potential);
  return max_grad_change(ga, gb);
}

double untruncated_restep_delta(const Mesh& mesh, const SubsonicCutoff& cutoff,
                                double eps, double m, const ForceField& force,
                                const ScalarField& solution, double cg_tol) {
  const GasLaw& gas = cutoff.gas_law();
  const auto grads = gradients_at_quad(solution);
  std::vector<double> w(mesh.n_quad());
  for (int q = 0; q < mesh.n_quad(); ++q) {
    const double q2 = grads[q][0] * grads[q][0] + grads[q][1] * grads[q][1];
    w[q] = density_from_speed(gas, eps, q2, force.value[q]);
  }
  LinearSystem sys = assemble_weighted_stiffness(mesh, w);
  sys.rhs = outlet_flux_load(mesh, m);
  SolveResult step = solve_spd(sys, mesh, cg_tol, &solution.values);
  return max_grad_change(gradients_at_quad(step.field), grads);
}

}  // namespace machzero
