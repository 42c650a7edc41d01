#include "machzero/cutoff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace machzero {

namespace {
constexpr int kEpsSamples = 32;
constexpr double kEpsGridDecades = 4.0;  // grid spans eps0 * [1e-4, 1]
}  // namespace

SubsonicCutoff SubsonicCutoff::make(const GasLaw& gas, double theta,
                                    double eps0,
                                    std::span<const double> phi_samples) {
  if (!(theta > 0.0 && theta < 1.0)) {
    throw std::domain_error("SubsonicCutoff: theta must lie in (0, 1)");
  }
  if (!(eps0 > 0.0 && eps0 < 1.0)) {
    throw std::domain_error("SubsonicCutoff: eps0 must lie in (0, 1)");
  }
  SubsonicCutoff cutoff(gas, theta, eps0);
  double plateau = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (double phi : phi_samples) {
    if (!(phi >= 0.0)) {
      throw std::domain_error(
          "SubsonicCutoff: force-potential samples must be non-negative");
    }
    plateau = std::max(plateau, cutoff.upper_ref_speed_sq(phi) - 2.0 * phi);
    any = true;
  }
  if (!any) plateau = cutoff.upper_ref_speed_sq(0.0);
  cutoff.plateau_ = plateau;
  // The saturated density h^{-1}(h(1) - eps^2 plateau / 2) must stay clear of
  // vacuum for every eps <= eps0.
  if (!(-eps0 * eps0 * plateau / 2.0 > gas.enthalpy_diff_inf())) {
    std::ostringstream msg;
    msg << "SubsonicCutoff: plateau " << plateau
        << " reaches vacuum at eps0 = " << eps0 << " for gas "
        << gas.describe();
    throw std::domain_error(msg.str());
  }
  return cutoff;
}

SubsonicCutoff SubsonicCutoff::make(const GasLaw& gas, double theta,
                                    double eps0) {
  const double zero = 0.0;
  return make(gas, theta, eps0, std::span<const double>(&zero, 1));
}

double SubsonicCutoff::mach_speed_sq(double eps, double tau,
                                     double phi_f) const {
  // Combining M = eps q / sqrt(p'(rho)) = tau with the Bernoulli density
  // gives, for p = rho^gamma,
  //   eps^2 q^2 = tau^2 (gamma + (gamma-1) eps^2 phi) / (1 + tau^2 (gamma-1)/2)
  // and for p = rho simply eps q = tau.
  if (gas_.kind() == GasLaw::Kind::isothermal) {
    return tau * tau / (eps * eps);
  }
  const double g = gas_.gamma();
  return tau * tau * (g + (g - 1.0) * eps * eps * phi_f) /
         ((1.0 + tau * tau * (g - 1.0) / 2.0) * eps * eps);
}

double SubsonicCutoff::mach_speed_sq_dphi(double tau) const {
  if (gas_.kind() == GasLaw::Kind::isothermal) return 0.0;
  const double g = gas_.gamma();
  return tau * tau * (g - 1.0) / (1.0 + tau * tau * (g - 1.0) / 2.0);
}

double SubsonicCutoff::inf_speed_sq(double tau, double phi_f) const {
  // Infimum over eps in (0, eps0] sampled on a log grid; the eps -> 0 limit
  // is +infinity for both laws so it never competes.
  double best = mach_speed_sq(eps0_, tau, phi_f);
  for (int i = 1; i < kEpsSamples; ++i) {
    const double eps =
        eps0_ * std::pow(10.0, -kEpsGridDecades * i / (kEpsSamples - 1));
    best = std::min(best, mach_speed_sq(eps, tau, phi_f));
  }
  return best;
}

double SubsonicCutoff::knot_speed_sq(double phi_f) const {
  return inf_speed_sq(theta_, phi_f);
}

double SubsonicCutoff::knot_speed(double phi_f) const {
  return std::sqrt(knot_speed_sq(phi_f));
}

double SubsonicCutoff::upper_ref_speed_sq(double phi_f) const {
  return inf_speed_sq((theta_ + 1.0) / 2.0, phi_f);
}

double SubsonicCutoff::blend_end_speed_sq(double phi_f) const {
  return blend_at(phi_f).lambda_hi;
}

SubsonicCutoff::Blend SubsonicCutoff::blend_at(double phi_f) const {
  Blend b;
  b.lambda0 = knot_speed_sq(phi_f);
  b.v0 = b.lambda0 - 2.0 * phi_f;
  b.width = plateau_ - b.v0;
  if (!(b.width > 0.0)) {
    std::ostringstream msg;
    msg << "SubsonicCutoff: force potential value " << phi_f
        << " lies outside the range the plateau was built for (plateau "
        << plateau_ << " <= identity value " << b.v0 << ")";
    throw std::domain_error(msg.str());
  }
  b.lambda_hi = b.lambda0 + 1.5 * b.width;
  return b;
}

double SubsonicCutoff::value(double q2, double phi_f) const {
  if (!(q2 >= 0.0)) {
    throw std::domain_error("SubsonicCutoff::value: q2 must be non-negative");
  }
  const Blend b = blend_at(phi_f);
  if (q2 <= b.lambda0) return q2 - 2.0 * phi_f;
  if (q2 >= b.lambda_hi) return plateau_;
  // Hermite arc with slope 1 at the lower knot and 0 at the upper one; the
  // 3/2 span makes the arc exactly v0 + 1.5 w (t - t^3/3).
  const double t = (q2 - b.lambda0) / (1.5 * b.width);
  return b.v0 + 1.5 * b.width * (t - t * t * t / 3.0);
}

double SubsonicCutoff::dvalue_dq2(double q2, double phi_f) const {
  const Blend b = blend_at(phi_f);
  if (q2 <= b.lambda0) return 1.0;
  if (q2 >= b.lambda_hi) return 0.0;
  const double t = (q2 - b.lambda0) / (1.5 * b.width);
  return 1.0 - t * t;
}

double SubsonicCutoff::dvalue_dphi(double q2, double phi_f) const {
  const Blend b = blend_at(phi_f);
  if (q2 <= b.lambda0) return -2.0;
  if (q2 >= b.lambda_hi) return 0.0;
  const double t = (q2 - b.lambda0) / (1.5 * b.width);
  const double dlambda0 = mach_speed_sq_dphi(theta_);
  return -2.0 + 2.0 * t * t * t + dlambda0 * t * t * (1.0 - t);
}

double SubsonicCutoff::density(double eps, double q2, double phi_f) const {
  if (!(eps > 0.0 && eps <= eps0_)) {
    std::ostringstream msg;
    msg << "SubsonicCutoff::density: eps = " << eps
        << " outside (0, " << eps0_ << "]";
    throw std::domain_error(msg.str());
  }
  return gas_.inv_enthalpy_diff(-eps * eps * value(q2, phi_f) / 2.0);
}

double SubsonicCutoff::density_dq2(double eps, double q2, double phi_f) const {
  const double y = -eps * eps * value(q2, phi_f) / 2.0;
  return gas_.dinv_enthalpy_diff(y) * (-eps * eps / 2.0) *
         dvalue_dq2(q2, phi_f);
}

double SubsonicCutoff::density_dphi(double eps, double q2,
                                    double phi_f) const {
  const double y = -eps * eps * value(q2, phi_f) / 2.0;
  return gas_.dinv_enthalpy_diff(y) * (-eps * eps / 2.0) *
         dvalue_dphi(q2, phi_f);
}

HatCoefficients hat_coefficients(const SubsonicCutoff& cutoff, double eps,
                                 const std::array<double, 2>& grad_phi,
                                 double phi_f,
                                 const std::array<double, 2>& grad_phi_f) {
  const double q2 = grad_phi[0] * grad_phi[0] + grad_phi[1] * grad_phi[1];
  const double rho = cutoff.density(eps, q2, phi_f);
  const double dp = cutoff.gas_law().dpressure(rho);
  const double ql = cutoff.dvalue_dq2(q2, phi_f);
  const double qp = cutoff.dvalue_dphi(q2, phi_f);
  const double eps2 = eps * eps;
  HatCoefficients h;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double kron = (i == j) ? 1.0 : 0.0;
      h.a[i][j] = rho * (kron - eps2 * ql * grad_phi[i] * grad_phi[j] / dp);
    }
    h.b[i] = eps2 * rho * qp * grad_phi_f[i] / dp;
  }
  return h;
}

}  // namespace machzero
