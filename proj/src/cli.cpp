#include "machzero/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "machzero/acceptance.hpp"
#include "machzero/io.hpp"
#include "machzero/limit_lab.hpp"

namespace machzero {

namespace {

std::string prepare_outdir(const std::string& outdir) {
  std::filesystem::create_directories(outdir);
  return outdir + "/";
}

void print_summary(const SummaryLines& lines) {
  for (const auto& [key, value] : lines) {
    std::cout << key << " = " << value << "\n";
  }
}

struct SolveArtifacts {
  Mesh mesh;
  SubsonicCutoff cutoff;
  ForcePotential fp;
  ForceField force;
};

SolveArtifacts build_artifacts(const RunConfig& cfg) {
  SolveArtifacts art{build_mesh(cfg.make_map(), cfg.half_length, cfg.nx,
                               cfg.nt),
                     SubsonicCutoff::make(cfg.make_gas(), 0.5, 0.5),
                     cfg.make_force(),
                     {}};
  art.force = force_potential_field(art.fp, art.mesh);
  art.cutoff = SubsonicCutoff::make(cfg.make_gas(), cfg.theta, cfg.eps0,
                                    art.force.value);
  return art;
}

double central_flux_drift(const ScalarField& potential,
                          std::span<const double> weights, double m,
                          int sections = 11) {
  const Mesh& mesh = *potential.mesh;
  const double L = mesh.half_length;
  double worst = 0.0;
  for (int k = 0; k < sections; ++k) {
    const double a = -L / 2.0 + L * k / (sections - 1);
    const double flux =
        flux_residual_mode(potential, weights, cross_section_facets(mesh, a));
    worst = std::max(worst, m != 0.0 ? std::abs(flux / m - 1.0)
                                     : std::abs(flux));
  }
  return worst;
}

}  // namespace

int cmd_solve_incompressible(const RunConfig& cfg, const std::string& outdir,
                             bool vtk) {
  const std::string dir = prepare_outdir(outdir);
  SolveArtifacts art = build_artifacts(cfg);
  const IncompressibleSolve sol =
      solve_incompressible(art.mesh, cfg.m, cfg.cg_tol);
  const FlowState state = incompressible_state(sol.potential, art.fp);
  const CutoffCheck check =
      check_cutoff_inactive(sol.potential, art.cutoff, art.force);

  SummaryLines lines;
  lines.emplace_back("command", "solve-incompressible");
  lines.emplace_back("m", fmt_double(cfg.m));
  lines.emplace_back("outlet_area", fmt_double(art.mesh.outlet_area));
  lines.emplace_back("mach_max", "0");
  lines.emplace_back("cutoff_margin", fmt_double(check.max_ratio));
  lines.emplace_back(
      "flux_drift",
      fmt_double(central_flux_drift(sol.potential, {}, cfg.m)));
  lines.emplace_back("iterations", std::to_string(sol.cg_iterations));
  lines.emplace_back("energy_constant", fmt_double(sol.energy_constant));

  write_field_dump(dir + "field.dat", sol.potential, state);
  if (vtk) write_vtk(dir + "field.vtk", sol.potential, state);
  write_summary(dir + "summary.txt", lines);
  print_summary(lines);
  return 0;
}

int cmd_solve_compressible(const RunConfig& cfg, const std::string& outdir,
                           bool vtk) {
  const std::string dir = prepare_outdir(outdir);
  SolveArtifacts art = build_artifacts(cfg);
  const CompressibleSolve sol =
      solve_compressible(art.mesh, art.cutoff, cfg.eps, cfg.m, art.force,
                         cfg.make_picard_options());
  const FlowState state =
      compressible_state(sol.potential, art.cutoff, cfg.eps, art.force);
  const CutoffCheck check =
      check_cutoff_inactive(sol.potential, art.cutoff, art.force);
  double mach_max = 0.0;
  for (double m : state.mach_number) mach_max = std::max(mach_max, m);

  SummaryLines lines;
  lines.emplace_back("command", "solve-compressible");
  lines.emplace_back("m", fmt_double(cfg.m));
  lines.emplace_back("eps", fmt_double(cfg.eps));
  lines.emplace_back("outlet_area", fmt_double(art.mesh.outlet_area));
  lines.emplace_back("mach_max", fmt_double(mach_max));
  lines.emplace_back("cutoff_margin", fmt_double(check.max_ratio));
  lines.emplace_back("modified_flow", state.modified_flow ? "yes" : "no");
  lines.emplace_back(
      "flux_drift",
      fmt_double(central_flux_drift(sol.potential, sol.weights, cfg.m)));
  lines.emplace_back("iterations", std::to_string(sol.iterations));
  for (const std::string& warning : sol.warnings) {
    lines.emplace_back("warning", warning);
  }

  write_field_dump(dir + "field.dat", sol.potential, state);
  if (vtk) write_vtk(dir + "field.vtk", sol.potential, state);
  write_summary(dir + "summary.txt", lines);
  print_summary(lines);
  return 0;
}

namespace {

SummaryLines sweep_common_summary(const RunConfig& cfg,
                                  const SweepReport& report,
                                  double outlet_area) {
  double mach_max = 0.0, margin = 0.0, drift = 0.0;
  int iters = 0;
  for (const SweepPoint& pt : report.points) {
    mach_max = std::max(mach_max, pt.mach_max);
    margin = std::max(margin, pt.cutoff_margin);
    drift = std::max(drift, pt.flux_drift);
    iters += pt.iters;
  }
  SummaryLines lines;
  lines.emplace_back("m", fmt_double(cfg.m));
  lines.emplace_back("outlet_area", fmt_double(outlet_area));
  lines.emplace_back("mach_max", fmt_double(mach_max));
  lines.emplace_back("cutoff_margin", fmt_double(margin));
  lines.emplace_back("flux_drift", fmt_double(drift));
  lines.emplace_back("iterations", std::to_string(iters));
  return lines;
}

}  // namespace

int cmd_sweep_eps(const RunConfig& cfg, const std::string& outdir) {
  const std::string dir = prepare_outdir(outdir);
  SolveArtifacts art = build_artifacts(cfg);
  EpsSweepConfig sweep;
  sweep.m = cfg.m;
  sweep.picard = cfg.make_picard_options();
  const SweepReport report =
      run_eps_sweep(art.mesh, art.cutoff, art.fp, cfg.eps_list, sweep);

  write_sweep_csv(dir + "sweep.csv", report);
  SummaryLines lines = sweep_common_summary(cfg, report,
                                            art.mesh.outlet_area);
  lines.emplace_back("command", "sweep-eps");
  std::rotate(lines.begin(), lines.end() - 1, lines.end());
  write_summary(dir + "summary.txt", lines);
  print_summary(lines);
  const std::string block = sweep_summary_text(report);
  std::ofstream(dir + "summary.txt", std::ios::app) << block;
  std::cout << block;
  return 0;
}

int cmd_sweep_L(const RunConfig& cfg, const std::string& outdir) {
  const std::string dir = prepare_outdir(outdir);
  const NozzleMap map = cfg.make_map();
  const ForcePotential fp = cfg.make_force();
  // The truncation must be identical across the swept domains, so the
  // plateau is built over the full admissible force range.
  std::vector<double> samples;
  for (int k = 0; k <= 32; ++k) samples.push_back(fp.phi_star() * k / 32.0);
  const SubsonicCutoff cutoff =
      SubsonicCutoff::make(cfg.make_gas(), cfg.theta, cfg.eps0, samples);

  LSweepConfig sweep;
  sweep.m = cfg.m;
  sweep.eps = cfg.eps;
  sweep.nt = cfg.nt;
  sweep.cells_per_unit = cfg.nx / (2.0 * cfg.half_length);
  sweep.picard = cfg.make_picard_options();
  const SweepReport report =
      run_L_sweep(map, cutoff, fp, cfg.L_list,
                  Window{cfg.window_a, cfg.window_b}, sweep);

  write_sweep_csv(dir + "sweep.csv", report);
  const Mesh probe = build_mesh(map, cfg.L_list.front(),
                                std::max(2, static_cast<int>(std::lround(
                                                sweep.cells_per_unit * 2.0 *
                                                cfg.L_list.front()))),
                                cfg.nt);
  SummaryLines lines = sweep_common_summary(cfg, report, probe.outlet_area);
  lines.emplace_back("command", "sweep-L");
  std::rotate(lines.begin(), lines.end() - 1, lines.end());
  write_summary(dir + "summary.txt", lines);
  print_summary(lines);
  const std::string block = sweep_summary_text(report);
  std::ofstream(dir + "summary.txt", std::ios::app) << block;
  std::cout << block;
  return 0;
}

int cmd_check(const RunConfig& cfg, const std::string& outdir) {
  (void)cfg;  // the suite pins its own parameters; the config is validated
  const std::string dir = prepare_outdir(outdir);
  std::ostringstream capture;
  struct Tee : std::streambuf {
    std::streambuf* a;
    std::streambuf* b;
    int overflow(int c) override {
      if (c != EOF) {
        a->sputc(static_cast<char>(c));
        b->sputc(static_cast<char>(c));
      }
      return c;
    }
  } tee;
  tee.a = std::cout.rdbuf();
  tee.b = capture.rdbuf();
  std::ostream both(&tee);
  const AcceptanceReport report = run_acceptance(both);
  std::ofstream(dir + "acceptance.txt") << capture.str();
  return report.all_pass ? 0 : 1;
}

}  // namespace machzero
