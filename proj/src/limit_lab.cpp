#include "machzero/limit_lab.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace machzero {

RateFit fit_rate(std::span<const double> params,
                 std::span<const double> metrics) {
  if (params.size() != metrics.size()) {
    throw std::invalid_argument("fit_rate: size mismatch");
  }
  RateFit fit;
  std::vector<double> lx, ly;
  int excluded = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!(params[i] > 0.0)) {
      throw std::domain_error("fit_rate: parameters must be positive");
    }
    if (metrics[i] > 0.0) {
      lx.push_back(std::log(params[i]));
      ly.push_back(std::log(metrics[i]));
    } else {
      ++excluded;
    }
  }
  if (excluded > 0) {
    std::ostringstream note;
    note << excluded << " non-positive metric(s) excluded";
    fit.note = note.str();
  }
  fit.n_used = static_cast<int>(lx.size());
  if (fit.n_used < 3) {
    fit.note += fit.note.empty() ? "" : "; ";
    fit.note += "fewer than 3 positive samples, no fit";
    return fit;
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < fit.n_used; ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double n = fit.n_used;
  const double denom = n * sxx - sx * sx;
  fit.slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - fit.slope * sx) / n;
  for (int i = 0; i < fit.n_used; ++i) {
    fit.residual = std::max(
        fit.residual, std::abs(ly[i] - (fit.slope * lx[i] + intercept)));
  }
  fit.valid = true;
  return fit;
}

std::vector<TestFieldSpec> pressure_test_basket(double half_length) {
  const double L = half_length;
  const double r = std::min(0.6, L / 4.0);
  const double s = 1.0 / std::sqrt(2.0);
  return {
      {0.0, -L / 2.0, r, 0.0, 1.0},
      {0.0, -L / 4.0, r, 1.0, 0.0},
      {0.0, 0.0, r, 0.0, 1.0},
      {0.0, L / 4.0, r, s, s},
      {0.0, L / 2.0, r, 0.0, 1.0},
  };
}

namespace {

// Mollifier bump exp(1 - 1/(1 - s^2)) and its radial derivative factor.
struct BumpEval {
  double value;
  Point2 grad;
};

BumpEval eval_bump(const TestFieldSpec& spec, Point2 x) {
  BumpEval out{0.0, {0.0, 0.0}};
  const double dt = (x[0] - spec.center_t) / spec.radius;
  const double dz = (x[1] - spec.center_z) / spec.radius;
  const double s2 = dt * dt + dz * dz;
  if (s2 >= 1.0) return out;
  const double one_minus = 1.0 - s2;
  out.value = std::exp(1.0 - 1.0 / one_minus);
  const double dv = -out.value / (one_minus * one_minus);
  out.grad = {dv * 2.0 * dt / spec.radius, dv * 2.0 * dz / spec.radius};
  return out;
}

}  // namespace

double weak_pressure_gap(const Mesh& mesh, const FlowState& state,
                         const FlowState& reference) {
  if (state.velocity.size() != reference.velocity.size() ||
      static_cast<int>(state.velocity.size()) != mesh.n_quad()) {
    throw std::invalid_argument(
        "weak_pressure_gap: states must share the mesh");
  }
  double gap = 0.0;
  for (const TestFieldSpec& spec : pressure_test_basket(mesh.half_length)) {
    double integral = 0.0;
    for (int q = 0; q < mesh.n_quad(); ++q) {
      const BumpEval bump = eval_bump(spec, mesh.quad[q].pos);
      if (bump.value == 0.0 && bump.grad[0] == 0.0 && bump.grad[1] == 0.0) {
        continue;
      }
      // grad(w) for w = dir * bump:  dw_i/dx_j = dir_i * dbump/dx_j
      const double dir[2] = {spec.dir_t, spec.dir_z};
      const auto& u = state.velocity[q];
      const auto& v = reference.velocity[q];
      const double ru = state.density[q];
      const double rv = reference.density[q];
      double contraction = 0.0;
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          const double flux_diff = ru * u[i] * u[j] - rv * v[i] * v[j];
          contraction += flux_diff * dir[i] * bump.grad[j];
        }
      }
      integral += mesh.quad[q].weight * contraction;
    }
    gap = std::max(gap, std::abs(integral));
  }
  return gap;
}

namespace {

double max_flux_drift(const ScalarField& potential,
                      std::span<const double> weights, double m,
                      const Window& window, int sections) {
  const Mesh& mesh = *potential.mesh;
  double worst = 0.0;
  for (int k = 0; k < sections; ++k) {
    const double a =
        window.a + (window.b - window.a) * k / std::max(1, sections - 1);
    const CrossSection cs = cross_section_facets(mesh, a);
    const double flux = flux_residual_mode(potential, weights, cs);
    const double drift =
        (m != 0.0) ? std::abs(flux / m - 1.0) : std::abs(flux);
    worst = std::max(worst, drift);
  }
  return worst;
}

void window_diagnostics(const ScalarField& potential, const Window& window,
                        SweepReport* report) {
  const Mesh& mesh = *potential.mesh;
  for (double a = window.a; a + 2.0 <= window.b + 1e-9; a += 1.0) {
    report->window_avg_max = std::max(
        report->window_avg_max,
        window_avg_gradsq(potential, Window{a, a + 2.0}));
  }
  for (double a = window.a; a + 1.0 <= window.b + 1e-9; a += 1.0) {
    const PoincareResult pc = poincare_check(potential, Window{a, a + 1.0});
    report->poincare_max = std::max(report->poincare_max, pc.ratio);
  }
  // sup |grad| over the window against the global energy norm
  const auto grads = gradients_at_quad(potential);
  double sup = 0.0, energy = 0.0;
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const double zc = mesh.elem_axial_center(e);
    for (int q = 0; q < 4; ++q) {
      const int iq = 4 * e + q;
      const double g2 =
          grads[iq][0] * grads[iq][0] + grads[iq][1] * grads[iq][1];
      energy += mesh.quad[iq].weight * g2;
      if (zc > window.a && zc < window.b) sup = std::max(sup, std::sqrt(g2));
    }
  }
  if (energy > 0.0) {
    report->grad_sup_over_l2 =
        std::max(report->grad_sup_over_l2, sup / energy);
  }
}

}  // namespace

SweepReport run_eps_sweep(const Mesh& mesh, const SubsonicCutoff& cutoff,
                          const ForcePotential& fp,
                          std::span<const double> eps_list,
                          const EpsSweepConfig& config) {
  for (std::size_t i = 0; i + 1 < eps_list.size(); ++i) {
    if (!(eps_list[i] > eps_list[i + 1])) {
      throw std::invalid_argument(
          "run_eps_sweep: eps list must be strictly decreasing");
    }
  }
  for (double e : eps_list) {
    if (!(e > 0.0 && e <= cutoff.eps0())) {
      throw std::invalid_argument("run_eps_sweep: eps outside (0, eps0]");
    }
  }
  SweepReport report;
  report.kind = SweepReport::Kind::eps;
  report.window = {-mesh.half_length / 2.0, mesh.half_length / 2.0};

  const ForceField force = force_potential_field(fp, mesh);
  IncompressibleSolve base =
      solve_incompressible(mesh, config.m, config.picard.cg_tol);
  const FlowState bar_state = incompressible_state(base.potential, fp);
  window_diagnostics(base.potential, report.window, &report);

  std::vector<int> window_qps;
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const double zc = mesh.elem_axial_center(e);
    if (zc > report.window.a && zc < report.window.b) {
      for (int q = 0; q < 4; ++q) window_qps.push_back(4 * e + q);
    }
  }

  ScalarField previous = base.potential;
  for (double eps : eps_list) {
    SweepPoint pt;
    pt.param = eps;
    try {
      const ScalarField* init = config.warm_start ? &previous : nullptr;
      CompressibleSolve sol = solve_compressible(mesh, cutoff, eps, config.m,
                                                 force, config.picard, init);
      pt.converged = true;
      pt.iters = sol.iterations;
      const FlowState state =
          compressible_state(sol.potential, cutoff, eps, force);
      for (int iq : window_qps) {
        const double du0 = state.velocity[iq][0] - bar_state.velocity[iq][0];
        const double du1 = state.velocity[iq][1] - bar_state.velocity[iq][1];
        pt.err_u_max =
            std::max(pt.err_u_max, std::sqrt(du0 * du0 + du1 * du1));
        pt.err_rho_max =
            std::max(pt.err_rho_max, std::abs(state.density[iq] - 1.0));
        pt.mach_max = std::max(pt.mach_max, state.mach_number[iq]);
      }
      pt.weak_p_gap = weak_pressure_gap(mesh, state, bar_state);
      pt.flux_drift = max_flux_drift(sol.potential, sol.weights, config.m,
                                     report.window, config.flux_sections);
      const CutoffCheck check =
          check_cutoff_inactive(sol.potential, cutoff, force);
      pt.cutoff_margin = check.max_ratio;
      pt.cutoff_inactive = check.inactive;
      window_diagnostics(sol.potential, report.window, &report);
      if (config.warm_start) previous = sol.potential;
    } catch (const std::exception& err) {
      pt.converged = false;
      std::ostringstream note;
      note << "eps = " << eps << " failed: " << err.what();
      report.notes.push_back(note.str());
    }
    report.points.push_back(pt);
  }

  std::vector<double> ps, mu, mrho, mmach, mgap;
  for (const SweepPoint& pt : report.points) {
    if (!pt.converged || !pt.cutoff_inactive) continue;
    ps.push_back(pt.param);
    mu.push_back(pt.err_u_max);
    mrho.push_back(pt.err_rho_max);
    mmach.push_back(pt.mach_max);
    mgap.push_back(pt.weak_p_gap);
  }
  report.fit_u = fit_rate(ps, mu);
  report.fit_rho = fit_rate(ps, mrho);
  report.fit_mach = fit_rate(ps, mmach);
  report.fit_pgap = fit_rate(ps, mgap);
  return report;
}

SweepReport run_L_sweep(const NozzleMap& map, const SubsonicCutoff& cutoff,
                        const ForcePotential& fp,
                        std::span<const double> L_list, const Window& window,
                        const LSweepConfig& config) {
  if (L_list.size() < 2) {
    throw std::invalid_argument("run_L_sweep: need at least two lengths");
  }
  for (std::size_t i = 0; i + 1 < L_list.size(); ++i) {
    if (!(L_list[i] < L_list[i + 1])) {
      throw std::invalid_argument("run_L_sweep: lengths must be ascending");
    }
  }
  for (double L : L_list) {
    if (!(L >= std::max(std::abs(window.a), std::abs(window.b)) + 2.0)) {
      throw std::invalid_argument(
          "run_L_sweep: every L must exceed the window bound by 2");
    }
  }

  SweepReport report;
  report.kind = SweepReport::Kind::domain_length;
  report.window = window;

  // Only mesh-independent data survives each run; a ScalarField pins the
  // mesh address, which moving the Run into the vector would invalidate.
  struct Run {
    Mesh mesh;
    std::vector<Point2> grads;
    int iters = 0;
    double mach_max = 0.0;
    double margin = 0.0;
    double flux_drift = 0.0;
    double err_rho_max = 0.0;
    double weak_gap = 0.0;
  };
  std::vector<Run> runs;
  runs.reserve(L_list.size());
  for (double L : L_list) {
    Run run;
    const int nx = std::max(2, static_cast<int>(std::lround(
                                   config.cells_per_unit * 2.0 * L)));
    run.mesh = build_mesh(map, L, nx, config.nt);
    const ForceField force = force_potential_field(fp, run.mesh);
    if (config.eps > 0.0) {
      CompressibleSolve sol = solve_compressible(
          run.mesh, cutoff, config.eps, config.m, force, config.picard);
      run.iters = sol.iterations;
      const FlowState state =
          compressible_state(sol.potential, cutoff, config.eps, force);
      for (double mm : state.mach_number) {
        run.mach_max = std::max(run.mach_max, mm);
      }
      for (double r : state.density) {
        run.err_rho_max = std::max(run.err_rho_max, std::abs(r - 1.0));
      }
      run.margin =
          check_cutoff_inactive(sol.potential, cutoff, force).max_ratio;
      const IncompressibleSolve base =
          solve_incompressible(run.mesh, config.m, config.picard.cg_tol);
      run.weak_gap = weak_pressure_gap(
          run.mesh, state, incompressible_state(base.potential, fp));
      run.flux_drift = max_flux_drift(sol.potential, sol.weights, config.m,
                                      window, 11);
      run.grads = gradients_at_quad(sol.potential);
      window_diagnostics(sol.potential, window, &report);
    } else {
      IncompressibleSolve sol =
          solve_incompressible(run.mesh, config.m, config.picard.cg_tol);
      run.iters = sol.cg_iterations;
      run.flux_drift =
          max_flux_drift(sol.potential, {}, config.m, window, 11);
      run.grads = gradients_at_quad(sol.potential);
      window_diagnostics(sol.potential, window, &report);
    }
    runs.push_back(std::move(run));
  }

  // Window elements are keyed by their structured cylinder position, which
  // is shared across the nested meshes because the element size is fixed.
  const Run& ref = runs.back();
  const double h_ref = ref.mesh.axial_spacing();
  std::map<std::pair<int, long>, int> ref_elems;
  for (int e = 0; e < ref.mesh.n_elems(); ++e) {
    const double zc = ref.mesh.elem_axial_center(e);
    const int et = e % ref.mesh.nt;
    ref_elems[{et, std::lround(zc / h_ref * 2.0)}] = e;
  }

  for (std::size_t k = 0; k < runs.size(); ++k) {
    const Run& run = runs[k];
    SweepPoint pt;
    pt.param = L_list[k];
    pt.converged = true;
    pt.iters = run.iters;
    pt.mach_max = run.mach_max;
    pt.cutoff_margin = run.margin;
    pt.cutoff_inactive = run.margin < 1.0;
    pt.flux_drift = run.flux_drift;
    pt.err_rho_max = run.err_rho_max;
    pt.weak_p_gap = run.weak_gap;
    if (&run != &ref) {
      const double h = run.mesh.axial_spacing();
      double dmax = 0.0;
      bool matched = false;
      for (int e = 0; e < run.mesh.n_elems(); ++e) {
        const double zc = run.mesh.elem_axial_center(e);
        if (zc <= window.a || zc >= window.b) continue;
        const int et = e % run.mesh.nt;
        const auto it = ref_elems.find({et, std::lround(zc / h * 2.0)});
        if (it == ref_elems.end()) {
          throw std::runtime_error(
              "run_L_sweep: meshes do not nest over the window; "
              "choose L values commensurate with the cell size");
        }
        matched = true;
        for (int q = 0; q < 4; ++q) {
          const auto& ga = run.grads[4 * e + q];
          const auto& gb = ref.grads[4 * it->second + q];
          const double dt = ga[0] - gb[0];
          const double dz = ga[1] - gb[1];
          dmax = std::max(dmax, std::sqrt(dt * dt + dz * dz));
        }
      }
      if (!matched) {
        throw std::range_error("run_L_sweep: window captures no elements");
      }
      pt.err_u_max = dmax;
    }
    report.points.push_back(pt);
  }

  const double floor = 10.0 * config.picard.picard_tol;
  for (std::size_t k = 0; k + 2 < report.points.size(); ++k) {
    const double d0 = report.points[k].err_u_max;
    const double d1 = report.points[k + 1].err_u_max;
    if (d0 > floor && d1 > d0) {
      report.decay_flagged = true;
      std::ostringstream note;
      note << "non-monotone truncation error: d(L=" << report.points[k].param
           << ") = " << d0 << " vs d(L=" << report.points[k + 1].param
           << ") = " << d1;
      report.notes.push_back(note.str());
    }
  }
  return report;
}

}  // namespace machzero
