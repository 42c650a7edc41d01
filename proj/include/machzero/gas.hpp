#ifndef MACHZERO_GAS_HPP_
#define MACHZERO_GAS_HPP_

#include <string>

namespace machzero {

/// Barotropic pressure law p(rho) together with the derived enthalpy
/// functions used by the Bernoulli closures.
///
/// Two laws are supported:
///   polytropic:  p(rho) = rho^gamma, gamma > 1
///   isothermal:  p(rho) = rho
/// Both satisfy p'(rho) > 0 and 2 p'(rho) + rho p''(rho) > 0 for rho > 0,
/// which is what every routine below relies on.
class GasLaw {
 public:
  enum class Kind { polytropic, isothermal };

  static GasLaw polytropic(double gamma);
  static GasLaw isothermal();

  Kind kind() const { return kind_; }
  /// Adiabatic exponent; only meaningful for the polytropic law.
  double gamma() const { return gamma_; }

  double pressure(double rho) const;    // p(rho)
  double dpressure(double rho) const;   // p'(rho)
  double d2pressure(double rho) const;  // p''(rho)

  /// Enthalpy difference h(rho) - h(1), where h'(rho) = p'(rho)/rho.
  /// Strictly increasing in rho; polytropic: (gamma/(gamma-1))(rho^{gamma-1}-1),
  /// isothermal: log(rho).
  double enthalpy_diff(double rho) const;

  /// Inverse of enthalpy_diff: returns rho with enthalpy_diff(rho) = y.
  /// Throws std::range_error when y is below the vacuum limit of the law.
  double inv_enthalpy_diff(double y) const;

  /// Derivative of the inverse map at argument y: rho/p'(rho) at rho = inv(y).
  double dinv_enthalpy_diff(double y) const;

  /// Infimum of enthalpy_diff as rho -> 0+ (the vacuum limit):
  /// -gamma/(gamma-1) for polytropic, -inf for isothermal.
  double enthalpy_diff_inf() const;

  std::string describe() const;

 private:
  GasLaw(Kind kind, double gamma) : kind_(kind), gamma_(gamma) {}
  Kind kind_;
  double gamma_;
};

/// Rescaled pressure (p(rho) - p(1)) / eps^2.
double rescaled_pressure(const GasLaw& gas, double eps, double rho);

/// Mach number eps * q / sqrt(p'(rho)).
double mach(const GasLaw& gas, double eps, double q, double rho);

/// Density on the Bernoulli manifold at speed-squared q2 and force-potential
/// value phi_f:  rho = h^{-1}( h(1) + eps^2 (2 phi_f - q2) / 2 ).
/// Throws std::range_error (naming q2 and eps) if the state is past vacuum.
double density_from_speed(const GasLaw& gas, double eps, double q2,
                          double phi_f);

/// Critical (sonic) density: the root of
///   p'(rho)/2 + h(rho) - h(1) = eps^2 phi_f,
/// found by a safeguarded bisection to 1e-12.
double critical_density(const GasLaw& gas, double eps, double phi_f);

/// Critical (sonic) speed sqrt(p'(rho_cr)) / eps.
double critical_speed(const GasLaw& gas, double eps, double phi_f);

/// The unique speed q with mach(q, density_from_speed(q^2, phi_f)) = theta,
/// found by bisection on [0, critical_speed]. theta = 1 returns the critical
/// speed itself. Monotone non-decreasing in theta.
double speed_at_mach(const GasLaw& gas, double eps, double theta,
                     double phi_f);

}  // namespace machzero

#endif  // MACHZERO_GAS_HPP_
