#ifndef MACHZERO_LIMIT_LAB_HPP_
#define MACHZERO_LIMIT_LAB_HPP_

#include <span>
#include <string>
#include <vector>

#include "machzero/compressible.hpp"
#include "machzero/incompressible.hpp"

namespace machzero {

struct RateFit {
  double slope = 0.0;
  double residual = 0.0;  // max |log deviation| from the fitted line
  int n_used = 0;
  bool valid = false;
  std::string note;
};

/// Log-log ordinary least squares of metric against parameter.  Requires at
/// least 3 positive samples; non-positive metrics are excluded with a note.
RateFit fit_rate(std::span<const double> params,
                 std::span<const double> metrics);

/// A smooth compactly supported vector test field for the weak pressure-gap
/// probe: direction times a mollifier bump.
struct TestFieldSpec {
  double center_t, center_z;
  double radius;
  double dir_t, dir_z;
};

/// The fixed basket of 5 test fields for a nozzle of half-length L; centers
/// sit on the axis at z = {-L/2, -L/4, 0, L/4, L/2} with radius
/// min(0.6, L/4).
std::vector<TestFieldSpec> pressure_test_basket(double half_length);

/// max over the basket of | int (rho u (x) u - rho_ref u_ref (x) u_ref)
///                          : grad w dx |,
/// the momentum-flux pairing behind the weak convergence of the pressure
/// gradient.
double weak_pressure_gap(const Mesh& mesh, const FlowState& state,
                         const FlowState& reference);

struct SweepPoint {
  double param = 0.0;
  double err_u_max = 0.0;
  double err_rho_max = 0.0;
  double mach_max = 0.0;
  double weak_p_gap = 0.0;
  double flux_drift = 0.0;
  double cutoff_margin = 0.0;
  int iters = 0;
  bool converged = false;
  bool cutoff_inactive = false;
};

struct SweepReport {
  enum class Kind { eps, domain_length };
  Kind kind = Kind::eps;
  Window window{0.0, 0.0};
  std::vector<SweepPoint> points;
  RateFit fit_u, fit_rho, fit_mach, fit_pgap;
  // diagnostics over the solved fields
  double window_avg_max = 0.0;   // sliding length-2 window max of avg|grad|^2
  double poincare_max = 0.0;     // sliding unit-window max Poincare ratio
  double grad_sup_over_l2 = 0.0; // sup |grad| over the window / energy norm
  bool decay_flagged = false;    // L sweep: non-monotone d_L above noise
  std::vector<std::string> notes;
};

struct EpsSweepConfig {
  double m = 1.0;
  bool warm_start = true;
  PicardOptions picard;
  int flux_sections = 11;
};

/// Solves the incompressible problem once and the truncated compressible
/// problem at every eps (strictly decreasing, warm-started by default),
/// measuring errors against the incompressible state over the central
/// window (-L/2, L/2) and fitting log-log slopes over the cutoff-inactive
/// points.
SweepReport run_eps_sweep(const Mesh& mesh, const SubsonicCutoff& cutoff,
                          const ForcePotential& fp,
                          std::span<const double> eps_list,
                          const EpsSweepConfig& config);

struct LSweepConfig {
  double m = 1.0;
  double eps = 0.0;            // > 0 selects the compressible flow
  int nt = 16;
  double cells_per_unit = 8.0; // axial resolution, L-independent
  PicardOptions picard;
};

/// Solves on a family of truncations L (ascending; the largest is the
/// reference), with the element size held fixed, and reports
/// d_L = max over the fixed window of |grad phi_L - grad phi_ref| together
/// with the consecutive decay ratios d_{L_{k+1}} / d_{L_k}.
SweepReport run_L_sweep(const NozzleMap& map, const SubsonicCutoff& cutoff,
                        const ForcePotential& fp,
                        std::span<const double> L_list, const Window& window,
                        const LSweepConfig& config);

}  // namespace machzero

#endif  // MACHZERO_LIMIT_LAB_HPP_
