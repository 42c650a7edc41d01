#ifndef MACHZERO_CUTOFF_HPP_
#define MACHZERO_CUTOFF_HPP_

#include <array>
#include <span>

#include "machzero/gas.hpp"

namespace machzero {

/// Subsonic truncation of the density-speed relation on the phase plane
/// (q^2, phi_f).
///
/// The truncated phase variable qhat(q^2, phi_f) equals q^2 - 2 phi_f while
/// the speed stays below the Mach-theta speed, and saturates at a constant
/// plateau for large speeds; in between the two branches are joined by a C1
/// monotone cubic Hermite arc.  The truncated density
///
///   rhohat = h^{-1}( h(1) - eps^2 qhat / 2 )
///
/// then coincides with the Bernoulli density wherever the flow is slower
/// than the Mach-theta speed, and is bounded away from vacuum everywhere,
/// which keeps the potential-flow operator uniformly elliptic no matter how
/// fast an intermediate iterate happens to be.
///
/// The blend is arranged so that d(qhat)/d(q^2) stays in [0, 1] and
/// d(qhat)/d(phi_f) stays in [-2, 0]; both are needed for the ellipticity
/// bounds of the truncated coefficients.  Matching the plateau value with a
/// C1 arc of slope <= 1 requires the arc to span 3/2 times the value gap, so
/// the plateau branch starts at
///
///   lambda_hi = lambda_0 + (3/2) (plateau - (lambda_0 - 2 phi_f)),
///
/// where lambda_0 is the squared Mach-theta speed.  The plateau value itself
/// is the supremum of the squared Mach-((theta+1)/2) speed minus 2 phi_f
/// over the sampled force-potential values (typically the quadrature points
/// of the active mesh).
class SubsonicCutoff {
 public:
  /// Builds the truncation for a gas law, Mach threshold theta in (0,1) and
  /// reference compressibility eps0 in (0,1).  phi_samples are the
  /// force-potential values over which the plateau supremum is taken; they
  /// must be non-negative.
  static SubsonicCutoff make(const GasLaw& gas, double theta, double eps0,
                             std::span<const double> phi_samples);

  /// Zero-force convenience overload: plateau taken at phi_f = 0.
  static SubsonicCutoff make(const GasLaw& gas, double theta, double eps0);

  const GasLaw& gas_law() const { return gas_; }
  double theta() const { return theta_; }
  double eps0() const { return eps0_; }
  /// The constant value qhat takes on the saturated branch.
  double plateau() const { return plateau_; }

  /// Squared lower-knot speed: the infimum over eps in (0, eps0] of the
  /// Mach-theta speed at force potential phi_f (evaluated on a log grid of
  /// 32 eps samples; for the built-in laws the infimum sits at eps0).
  double knot_speed_sq(double phi_f) const;
  double knot_speed(double phi_f) const;

  /// Squared Mach-((theta+1)/2) reference speed entering the plateau value.
  double upper_ref_speed_sq(double phi_f) const;

  /// Squared speed at which the blend arc meets the plateau.
  double blend_end_speed_sq(double phi_f) const;

  /// qhat(q^2, phi_f) and its partial derivatives.
  double value(double q2, double phi_f) const;
  double dvalue_dq2(double q2, double phi_f) const;
  double dvalue_dphi(double q2, double phi_f) const;

  /// Truncated density rhohat and its partial derivatives; eps must lie in
  /// (0, eps0].
  double density(double eps, double q2, double phi_f) const;
  double density_dq2(double eps, double q2, double phi_f) const;
  double density_dphi(double eps, double q2, double phi_f) const;

 private:
  SubsonicCutoff(const GasLaw& gas, double theta, double eps0)
      : gas_(gas), theta_(theta), eps0_(eps0), plateau_(0.0) {}

  /// Exact Mach-tau speed squared for the built-in laws at compressibility
  /// eps, from the Bernoulli relation combined with M = tau.
  double mach_speed_sq(double eps, double tau, double phi_f) const;
  /// d/dphi of mach_speed_sq (independent of eps for the built-in laws).
  double mach_speed_sq_dphi(double tau) const;
  double inf_speed_sq(double tau, double phi_f) const;

  struct Blend {
    double lambda0;    // squared lower-knot speed
    double v0;         // lambda0 - 2 phi_f
    double width;      // plateau - v0
    double lambda_hi;  // lambda0 + 1.5 width
  };
  Blend blend_at(double phi_f) const;

  GasLaw gas_;
  double theta_;
  double eps0_;
  double plateau_;
};

/// Coefficients of the truncated potential-flow operator in non-divergence
/// form at a state (grad_phi, phi_f):
///   a_ij = rhohat (delta_ij - eps^2 qhat_L d_i phi d_j phi / p'(rhohat))
///   b_i  = eps^2 rhohat qhat_phi d_i phi_f / p'(rhohat)
/// a is symmetric positive definite with eigenvalue bounds depending only on
/// (theta, eps0, gas).
struct HatCoefficients {
  std::array<std::array<double, 2>, 2> a;
  std::array<double, 2> b;
};

HatCoefficients hat_coefficients(const SubsonicCutoff& cutoff, double eps,
                                 const std::array<double, 2>& grad_phi,
                                 double phi_f,
                                 const std::array<double, 2>& grad_phi_f);

}  // namespace machzero

#endif  // MACHZERO_CUTOFF_HPP_
