#include "machzero/acceptance.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "machzero/compressible.hpp"
#include "machzero/incompressible.hpp"
#include "machzero/limit_lab.hpp"

namespace machzero {

DuctOracle uniform_duct_oracle(const SubsonicCutoff& cutoff, double eps,
                               double flux_per_area, bool truncated) {
  const GasLaw& gas = cutoff.gas_law();
  if (!(flux_per_area >= 0.0)) {
    throw std::domain_error("uniform_duct_oracle: flux must be >= 0");
  }
  auto density_at = [&](double q) {
    return truncated ? cutoff.density(eps, q * q, 0.0)
                     : density_from_speed(gas, eps, q * q, 0.0);
  };
  auto excess = [&](double q) { return density_at(q) * q - flux_per_area; };

  double lo = 0.0, hi;
  if (truncated) {
    hi = 1.0;
    int guard = 0;
    while (excess(hi) < 0.0) {
      hi *= 2.0;
      if (++guard > 400) {
        throw std::runtime_error("uniform_duct_oracle: bracketing failed");
      }
    }
  } else {
    hi = critical_speed(gas, eps, 0.0);
    if (excess(hi) < 0.0) {
      std::ostringstream msg;
      msg << "uniform_duct_oracle: duct chokes, critical flux "
          << density_at(hi) * hi << " below requested " << flux_per_area;
      throw std::runtime_error(msg.str());
    }
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (excess(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-14 * std::max(1.0, hi)) break;
  }
  DuctOracle oracle;
  oracle.speed = 0.5 * (lo + hi);
  oracle.density = density_at(oracle.speed);
  oracle.mach_number = mach(gas, eps, oracle.speed, oracle.density);
  return oracle;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

// Random member of the discrete inlet-zero space with entries in [-1, 1].
std::vector<double> random_test_direction(const Mesh& mesh,
                                          std::mt19937& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<double> eta(mesh.n_nodes());
  for (double& v : eta) v = unif(rng);
  for (int n : mesh.inlet_nodes) eta[n] = 0.0;
  return eta;
}

double max_gap_from_uniform(const ScalarField& field, double axial_speed) {
  const auto grads = gradients_at_quad(field);
  double worst = 0.0;
  for (const auto& g : grads) {
    const double dt = g[0];
    const double dz = g[1] - axial_speed;
    worst = std::max(worst, std::sqrt(dt * dt + dz * dz));
  }
  return worst;
}

double incompressible_flux_drift(const ScalarField& potential, double m,
                                 const Window& window, int sections) {
  const Mesh& mesh = *potential.mesh;
  double worst = 0.0;
  for (int k = 0; k < sections; ++k) {
    const double a =
        window.a + (window.b - window.a) * k / std::max(1, sections - 1);
    const double flux = flux_residual_mode(
        potential, {}, cross_section_facets(mesh, a));
    worst = std::max(worst, std::abs(flux / m - 1.0));
  }
  return worst;
}

CriterionResult criterion_1() {
  CriterionResult res{1, "straight-nozzle incompressible exactness", false,
                      ""};
  double worst = 0.0;
  for (const auto& [L, nx, nt] :
       {std::tuple{2.0, 16, 8}, std::tuple{1.0, 5, 3}}) {
    const Mesh mesh = build_mesh(NozzleMap::straight(), L, nx, nt);
    const IncompressibleSolve sol = solve_incompressible(mesh, 1.0);
    worst = std::max(worst, max_gap_from_uniform(sol.potential, 0.5));
  }
  res.pass = worst <= 1e-10;
  res.detail = "max |grad - (0, 0.5)| = " + fmt(worst) + " (tol 1e-10)";
  return res;
}

CriterionResult criterion_2() {
  CriterionResult res{2, "straight-nozzle compressible vs 1D oracle", false,
                      ""};
  const auto start = Clock::now();
  const double eps = 0.1;
  const GasLaw gas = GasLaw::polytropic(2.0);
  const SubsonicCutoff cutoff = SubsonicCutoff::make(gas, 0.5, 0.1);
  const Mesh mesh = build_mesh(NozzleMap::straight(), 2.0, 16, 8);
  const ForceField force =
      force_potential_field(ForcePotential::zero(), mesh);
  const CompressibleSolve sol =
      solve_compressible(mesh, cutoff, eps, 1.0, force);
  const FlowState state =
      compressible_state(sol.potential, cutoff, eps, force);
  const DuctOracle oracle = uniform_duct_oracle(cutoff, eps, 0.5);
  double err_q = 0.0, err_rho = 0.0;
  for (std::size_t q = 0; q < state.density.size(); ++q) {
    const auto& u = state.velocity[q];
    const double speed = std::sqrt(u[0] * u[0] + u[1] * u[1]);
    err_q = std::max(err_q, std::abs(speed - oracle.speed));
    err_rho = std::max(err_rho, std::abs(state.density[q] - oracle.density));
  }
  const double elapsed = seconds_since(start);
  res.pass = err_q <= 1e-8 && err_rho <= 1e-8 && elapsed < 10.0;
  res.detail = "max |q - " + fmt(oracle.speed) + "| = " + fmt(err_q) +
               ", max |rho - " + fmt(oracle.density) + "| = " + fmt(err_rho) +
               " (tol 1e-8), runtime under 10 s: " +
               (elapsed < 10.0 ? "yes" : "NO (" + fmt(elapsed) + " s)");
  return res;
}

struct RateSetup {
  Mesh mesh;
  GasLaw gas = GasLaw::polytropic(1.4);
  SubsonicCutoff cutoff = SubsonicCutoff::make(gas, 0.5, 0.2);
  ForcePotential fp = ForcePotential::zero();
  std::vector<double> eps_list{0.2, 0.1, 0.05, 0.025};
  SweepReport report;
  double elapsed = 0.0;
};

RateSetup run_rate_sweep() {
  const auto start = Clock::now();
  RateSetup setup;
  setup.mesh = build_mesh(NozzleMap::sinusoidal(0.2, 4.0), 4.0, 128, 32);
  EpsSweepConfig config;
  config.m = 1.0;
  setup.report = run_eps_sweep(setup.mesh, setup.cutoff, setup.fp,
                               setup.eps_list, config);
  setup.elapsed = seconds_since(start);
  return setup;
}

CriterionResult criterion_3(const RateSetup& setup) {
  CriterionResult res{3, "low Mach convergence rates", false, ""};
  const SweepReport& r = setup.report;
  auto in = [](const RateFit& f, double lo, double hi) {
    return f.valid && f.slope >= lo && f.slope <= hi;
  };
  res.pass = in(r.fit_u, 1.8, 2.2) && in(r.fit_rho, 1.8, 2.2) &&
             in(r.fit_mach, 0.9, 1.1) && in(r.fit_pgap, 1.8, 2.2) &&
             setup.elapsed < 300.0;
  res.detail = "slopes u " + fmt(r.fit_u.slope) + " rho " +
               fmt(r.fit_rho.slope) + " mach " + fmt(r.fit_mach.slope) +
               " p-gap " + fmt(r.fit_pgap.slope) + " (windows [1.8,2.2] / " +
               "[0.9,1.1]), runtime under 300 s: " +
               (setup.elapsed < 300.0 ? "yes"
                                      : "NO (" + fmt(setup.elapsed) + " s)");
  return res;
}

CriterionResult criterion_4(const RateSetup& setup) {
  CriterionResult res{4, "mass flux constancy across sections", false, ""};
  double worst = 0.0;
  for (const SweepPoint& pt : setup.report.points) {
    worst = std::max(worst, pt.flux_drift);
  }
  const IncompressibleSolve base = solve_incompressible(setup.mesh, 1.0);
  worst = std::max(
      worst,
      incompressible_flux_drift(base.potential, 1.0,
                                Window{-2.0, 2.0}, 11));
  res.pass = worst <= 1e-10;
  res.detail = "max relative flux drift over 11 sections = " + fmt(worst) +
               " (tol 1e-10)";
  return res;
}

CriterionResult criterion_5() {
  CriterionResult res{5, "truncation decay in the domain length", false, ""};
  const NozzleMap map = NozzleMap::sinusoidal(0.2, 4.0);
  const GasLaw gas = GasLaw::polytropic(1.4);
  const SubsonicCutoff cutoff = SubsonicCutoff::make(gas, 0.5, 0.2);
  const std::vector<double> lengths{4.0, 8.0, 16.0};
  const Window window{-2.0, 2.0};

  std::ostringstream detail;
  bool pass = true;
  for (double eps : {0.0, 0.1}) {
    LSweepConfig config;
    config.m = 1.0;
    config.eps = eps;
    config.nt = 16;
    config.cells_per_unit = 8.0;
    const SweepReport rep = run_L_sweep(map, cutoff, ForcePotential::zero(),
                                        lengths, window, config);
    const double d4 = rep.points[0].err_u_max;
    const double d8 = rep.points[1].err_u_max;
    const double ratio = d4 > 0.0 ? d8 / d4 : 0.0;
    pass = pass && ratio <= 0.5;
    detail << (eps > 0.0 ? "compressible" : "incompressible") << " d4 = "
           << fmt(d4) << ", d8 = " << fmt(d8) << ", ratio = " << fmt(ratio)
           << " (<= 0.5); ";
  }
  res.pass = pass;
  res.detail = detail.str();
  return res;
}

CriterionResult criterion_6() {
  CriterionResult res{6, "local average bound stability in L", false, ""};
  const NozzleMap map = NozzleMap::sinusoidal(0.2, 4.0);
  const GasLaw gas = GasLaw::polytropic(1.4);
  const SubsonicCutoff cutoff = SubsonicCutoff::make(gas, 0.5, 0.2);
  const double m = 1.0;

  auto window_max = [&](const ScalarField& potential, double L) {
    double worst = 0.0;
    for (double a = -L / 2.0 + 1.0; a + 3.0 <= L / 2.0 + 1e-9; a += 1.0) {
      worst = std::max(worst,
                       window_avg_gradsq(potential, Window{a, a + 2.0}));
    }
    return worst / (m * m);
  };

  std::ostringstream detail;
  bool pass = true;
  for (bool compressible : {false, true}) {
    double vals[2] = {0.0, 0.0};
    int idx = 0;
    for (double L : {8.0, 16.0}) {
      const Mesh mesh =
          build_mesh(map, L, static_cast<int>(std::lround(16 * L)), 16);
      if (compressible) {
        const ForceField force =
            force_potential_field(ForcePotential::zero(), mesh);
        const CompressibleSolve sol =
            solve_compressible(mesh, cutoff, 0.1, m, force);
        vals[idx++] = window_max(sol.potential, L);
      } else {
        vals[idx++] = window_max(solve_incompressible(mesh, m).potential, L);
      }
    }
    const double rel = std::abs(vals[0] - vals[1]) / vals[1];
    pass = pass && rel <= 0.05;
    detail << (compressible ? "compressible" : "incompressible") << " max "
           << fmt(vals[0]) << " vs " << fmt(vals[1]) << ", rel diff "
           << fmt(rel) << " (<= 0.05); ";
  }
  res.pass = pass;
  res.detail = detail.str();
  return res;
}

CriterionResult criterion_7() {
  CriterionResult res{7, "minimizer optimality under random perturbations",
                      false, ""};
  const Mesh mesh = build_mesh(NozzleMap::sinusoidal(0.2, 4.0), 4.0, 64, 16);
  const double m = 1.0;
  const GasLaw gas = GasLaw::polytropic(1.4);
  const SubsonicCutoff cutoff = SubsonicCutoff::make(gas, 0.5, 0.2);
  const double eps = 0.1;
  const ForceField force =
      force_potential_field(ForcePotential::zero(), mesh);

  const IncompressibleSolve base = solve_incompressible(mesh, m);
  const double j_min = functional_J(base.potential, m);
  const CompressibleSolve comp =
      solve_compressible(mesh, cutoff, eps, m, force);
  const double i_min =
      functional_I(comp.potential, base.potential, cutoff, eps, force.value);

  std::mt19937 rng(20240817);
  int j_violations = 0, i_violations = 0;
  double j_margin = 1e300, i_margin = 1e300;
  for (int trial = 0; trial < 100; ++trial) {
    const std::vector<double> eta = random_test_direction(mesh, rng);
    ScalarField candidate = base.potential;
    for (int i = 0; i < mesh.n_nodes(); ++i) {
      candidate.values[i] += 1e-2 * eta[i];
    }
    const double j_val = functional_J(candidate, m);
    j_margin = std::min(j_margin, j_val - j_min);
    if (!(j_val > j_min)) ++j_violations;

    ScalarField competitor = base.potential;
    for (int i = 0; i < mesh.n_nodes(); ++i) {
      competitor.values[i] += eps * eps * eta[i];
    }
    const double i_val =
        functional_I(competitor, base.potential, cutoff, eps, force.value);
    i_margin = std::min(i_margin, i_val - i_min);
    if (!(i_val > i_min)) ++i_violations;
  }
  res.pass = j_violations == 0 && i_violations == 0;
  res.detail = "100 trials: J violations " + std::to_string(j_violations) +
               " (min margin " + fmt(j_margin) + "), I violations " +
               std::to_string(i_violations) + " (min margin " +
               fmt(i_margin) + ")";
  return res;
}

CriterionResult criterion_8() {
  CriterionResult res{8, "uniqueness probes on both geometries", false, ""};
  const Mesh straight = build_mesh(NozzleMap::straight(), 2.0, 16, 8);
  const Mesh wavy = build_mesh(NozzleMap::sinusoidal(0.2, 4.0), 4.0, 64, 16);

  const double d_inc_straight = uniqueness_probe_incompressible(straight, 1.0);
  const double d_inc_wavy = uniqueness_probe_incompressible(wavy, 1.0);

  const SubsonicCutoff cut_straight =
      SubsonicCutoff::make(GasLaw::polytropic(2.0), 0.5, 0.1);
  const SubsonicCutoff cut_wavy =
      SubsonicCutoff::make(GasLaw::polytropic(1.4), 0.5, 0.2);
  const double d_cmp_straight = uniqueness_probe_compressible(
      straight, cut_straight, 0.1, 1.0,
      force_potential_field(ForcePotential::zero(), straight));
  const double d_cmp_wavy = uniqueness_probe_compressible(
      wavy, cut_wavy, 0.2, 1.0,
      force_potential_field(ForcePotential::zero(), wavy));

  const double worst = std::max({d_inc_straight, d_inc_wavy, d_cmp_straight,
                                 d_cmp_wavy});
  res.pass = worst <= 1e-9;
  res.detail = "max two-initialization gradient discrepancy = " + fmt(worst) +
               " (tol 1e-9)";
  return res;
}

CriterionResult criterion_9(const RateSetup& setup) {
  CriterionResult res{9, "cut-off inactivity and removal", false, ""};
  const ForceField force = force_potential_field(setup.fp, setup.mesh);
  const EpsThreshold threshold =
      find_eps_c(setup.mesh, setup.cutoff, 1.0, force);

  bool pass = true;
  double worst_margin = 0.0, worst_restep = 0.0;
  const IncompressibleSolve base = solve_incompressible(setup.mesh, 1.0);
  ScalarField previous = base.potential;
  for (double eps : setup.eps_list) {
    if (eps > threshold.threshold) continue;
    const CompressibleSolve sol = solve_compressible(
        setup.mesh, setup.cutoff, eps, 1.0, force, {}, &previous);
    previous = sol.potential;
    const CutoffCheck check =
        check_cutoff_inactive(sol.potential, setup.cutoff, force);
    worst_margin = std::max(worst_margin, check.max_ratio);
    pass = pass && check.inactive;
    const double restep = untruncated_restep_delta(
        setup.mesh, setup.cutoff, eps, 1.0, force, sol.potential);
    worst_restep = std::max(worst_restep, restep);
    pass = pass && restep <= 1e-10;
  }
  res.pass = pass;
  res.detail = "threshold = " + fmt(threshold.threshold) +
               ", worst margin = " + fmt(worst_margin) +
               " (< 1), worst untruncated re-step = " + fmt(worst_restep) +
               " (tol 1e-10)";
  return res;
}

CriterionResult criterion_10() {
  CriterionResult res{10, "gas-module unit properties", false, ""};
  std::ostringstream detail;
  bool pass = true;

  const std::vector<GasLaw> laws = {GasLaw::polytropic(1.4),
                                    GasLaw::polytropic(2.0),
                                    GasLaw::polytropic(3.0),
                                    GasLaw::isothermal()};

  // enthalpy monotonicity and inversion round trips
  double worst_roundtrip = 0.0;
  bool monotone = true;
  for (const GasLaw& gas : laws) {
    double prev = gas.enthalpy_diff(0.05);
    for (int k = 1; k <= 200; ++k) {
      const double rho = 0.05 + (4.0 - 0.05) * k / 200.0;
      const double h = gas.enthalpy_diff(rho);
      monotone = monotone && h > prev;
      prev = h;
      const double back = gas.inv_enthalpy_diff(h);
      worst_roundtrip =
          std::max(worst_roundtrip, std::abs(back - rho) / rho);
    }
  }
  pass = pass && monotone && worst_roundtrip <= 1e-12;
  detail << "inversion round-trip " << fmt(worst_roundtrip)
         << " (tol 1e-12), monotone " << (monotone ? "yes" : "no") << "; ";

  // qhat: monotone in q^2, C1 at the knots
  {
    const GasLaw gas = GasLaw::polytropic(1.4);
    const std::vector<double> phis = {0.0, 0.3, 1.0};
    const SubsonicCutoff cutoff = SubsonicCutoff::make(gas, 0.5, 0.2, phis);
    double min_slope = 1e300, worst_c1 = 0.0, worst_deriv = 0.0;
    for (double phi : phis) {
      const double hi = cutoff.blend_end_speed_sq(phi) * 2.0;
      double prev = cutoff.value(0.0, phi);
      const int n = 4000;
      for (int k = 1; k <= n; ++k) {
        const double q2 = hi * k / n;
        const double v = cutoff.value(q2, phi);
        min_slope = std::min(min_slope, (v - prev) / (hi / n));
        prev = v;
        // analytic slope vs central difference
        const double h = 1e-6 * hi;
        if (q2 > h) {
          const double fd = (cutoff.value(q2 + h, phi) -
                             cutoff.value(q2 - h, phi)) /
                            (2.0 * h);
          worst_deriv = std::max(
              worst_deriv, std::abs(fd - cutoff.dvalue_dq2(q2, phi)));
        }
      }
      for (double knot : {cutoff.knot_speed_sq(phi),
                          cutoff.blend_end_speed_sq(phi)}) {
        const double delta = 1e-12 * std::max(1.0, knot);
        worst_c1 = std::max(worst_c1,
                            std::abs(cutoff.dvalue_dq2(knot - delta, phi) -
                                     cutoff.dvalue_dq2(knot + delta, phi)));
      }
    }
    pass = pass && min_slope >= -1e-12 && worst_c1 < 1e-10 &&
           worst_deriv < 1e-5;
    detail << "qhat min slope " << fmt(min_slope) << ", knot C1 mismatch "
           << fmt(worst_c1) << " (tol 1e-10); ";
  }

  // coefficient matrix SPD over random admissible states
  {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double min_eig = 1e300, max_asym = 0.0;
    for (int trial = 0; trial < 10000; ++trial) {
      const GasLaw& gas = laws[trial % laws.size()];
      const double theta = 0.15 + 0.7 * unif(rng);
      const double eps0 = 0.05 + 0.25 * unif(rng);
      const double phi_star = (trial % 3 == 0) ? 0.0 : unif(rng);
      std::vector<double> samples;
      for (int k = 0; k <= 8; ++k) samples.push_back(phi_star * k / 8.0);
      const SubsonicCutoff cutoff =
          SubsonicCutoff::make(gas, theta, eps0, samples);
      const double eps = eps0 * (0.2 + 0.8 * unif(rng));
      const double phi = phi_star * unif(rng);
      const double qmax = 1.5 * std::sqrt(cutoff.blend_end_speed_sq(phi));
      const double speed = qmax * unif(rng);
      const double angle = 2.0 * std::numbers::pi * unif(rng);
      const std::array<double, 2> grad = {speed * std::cos(angle),
                                          speed * std::sin(angle)};
      const std::array<double, 2> gphi = {unif(rng) - 0.5, unif(rng) - 0.5};
      const HatCoefficients h =
          hat_coefficients(cutoff, eps, grad, phi, gphi);
      max_asym = std::max(max_asym, std::abs(h.a[0][1] - h.a[1][0]));
      const double tr = h.a[0][0] + h.a[1][1];
      const double disc = std::sqrt(
          (h.a[0][0] - h.a[1][1]) * (h.a[0][0] - h.a[1][1]) +
          4.0 * h.a[0][1] * h.a[1][0]);
      min_eig = std::min(min_eig, 0.5 * (tr - disc));
    }
    pass = pass && min_eig > 0.0 && max_asym <= 1e-14;
    detail << "min eigenvalue over 10^4 states " << fmt(min_eig)
           << " (> 0), asymmetry " << fmt(max_asym) << "; ";
  }

  // speed_at_mach inverts mach
  {
    double worst = 0.0;
    for (const GasLaw& gas : laws) {
      for (double theta : {0.1, 0.3, 0.5, 0.7, 0.9, 0.99}) {
        for (double eps : {0.05, 0.1, 0.3}) {
          for (double phi : {0.0, 0.5}) {
            const double q = speed_at_mach(gas, eps, theta, phi);
            const double rho = density_from_speed(gas, eps, q * q, phi);
            worst = std::max(worst, std::abs(mach(gas, eps, q, rho) - theta));
          }
        }
      }
    }
    pass = pass && worst <= 1e-10;
    detail << "mach inversion error " << fmt(worst) << " (tol 1e-10)";
  }

  res.pass = pass;
  res.detail = detail.str();
  return res;
}

}  // namespace

AcceptanceReport run_acceptance(std::ostream& log) {
  AcceptanceReport report;
  auto push = [&](CriterionResult res) {
    log << (res.pass ? "[PASS]" : "[FAIL]") << " criterion " << res.id << ": "
        << res.name << " -- " << res.detail << "\n";
    log.flush();
    report.results.push_back(std::move(res));
  };

  push(criterion_1());
  push(criterion_2());
  const RateSetup setup = run_rate_sweep();
  push(criterion_3(setup));
  push(criterion_4(setup));
  push(criterion_5());
  push(criterion_6());
  push(criterion_7());
  push(criterion_8());
  push(criterion_9(setup));
  push(criterion_10());

  report.all_pass = true;
  for (const auto& res : report.results) report.all_pass &= res.pass;
  log << (report.all_pass ? "all criteria passed"
                          : "one or more criteria FAILED")
      << "\n";
  return report;
}

}  // namespace machzero
