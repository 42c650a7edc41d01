#include "machzero/gas.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace machzero {

namespace {

void require_positive_density(double rho, const char* where) {
  if (!(rho > 0.0)) {
    std::ostringstream msg;
    msg << where << ": density must be positive, got rho = " << rho;
    throw std::domain_error(msg.str());
  }
}

void require_positive_eps(double eps, const char* where) {
  if (!(eps > 0.0)) {
    std::ostringstream msg;
    msg << where << ": compressibility parameter must be positive, got eps = "
        << eps;
    throw std::domain_error(msg.str());
  }
}

}  // namespace

GasLaw GasLaw::polytropic(double gamma) {
  if (!(gamma > 1.0)) {
    std::ostringstream msg;
    msg << "GasLaw::polytropic: exponent must exceed 1, got gamma = " << gamma;
    throw std::domain_error(msg.str());
  }
  return GasLaw(Kind::polytropic, gamma);
}

GasLaw GasLaw::isothermal() { return GasLaw(Kind::isothermal, 1.0); }

double GasLaw::pressure(double rho) const {
  require_positive_density(rho, "GasLaw::pressure");
  return kind_ == Kind::polytropic ? std::pow(rho, gamma_) : rho;
}

double GasLaw::dpressure(double rho) const {
  require_positive_density(rho, "GasLaw::dpressure");
  return kind_ == Kind::polytropic ? gamma_ * std::pow(rho, gamma_ - 1.0)
                                   : 1.0;
}

double GasLaw::d2pressure(double rho) const {
  require_positive_density(rho, "GasLaw::d2pressure");
  return kind_ == Kind::polytropic
             ? gamma_ * (gamma_ - 1.0) * std::pow(rho, gamma_ - 2.0)
             : 0.0;
}

double GasLaw::enthalpy_diff(double rho) const {
  require_positive_density(rho, "GasLaw::enthalpy_diff");
  if (kind_ == Kind::polytropic) {
    return gamma_ / (gamma_ - 1.0) * (std::pow(rho, gamma_ - 1.0) - 1.0);
  }
  return std::log(rho);
}

double GasLaw::inv_enthalpy_diff(double y) const {
  if (kind_ == Kind::polytropic) {
    const double base = 1.0 + (gamma_ - 1.0) / gamma_ * y;
    if (!(base > 0.0)) {
      std::ostringstream msg;
      msg << "GasLaw::inv_enthalpy_diff: argument " << y
          << " is at or past the vacuum limit " << enthalpy_diff_inf();
      throw std::range_error(msg.str());
    }
    return std::pow(base, 1.0 / (gamma_ - 1.0));
  }
  return std::exp(y);
}

double GasLaw::dinv_enthalpy_diff(double y) const {
  const double rho = inv_enthalpy_diff(y);
  return rho / dpressure(rho);
}

double GasLaw::enthalpy_diff_inf() const {
  return kind_ == Kind::polytropic
             ? -gamma_ / (gamma_ - 1.0)
             : -std::numeric_limits<double>::infinity();
}

std::string GasLaw::describe() const {
  if (kind_ == Kind::polytropic) {
    std::ostringstream s;
    s << "polytropic(gamma=" << gamma_ << ")";
    return s.str();
  }
  return "isothermal";
}

double rescaled_pressure(const GasLaw& gas, double eps, double rho) {
  require_positive_eps(eps, "rescaled_pressure");
  return (gas.pressure(rho) - gas.pressure(1.0)) / (eps * eps);
}

double mach(const GasLaw& gas, double eps, double q, double rho) {
  require_positive_eps(eps, "mach");
  if (!(q >= 0.0)) {
    throw std::domain_error("mach: speed must be non-negative");
  }
  return eps * q / std::sqrt(gas.dpressure(rho));
}

double density_from_speed(const GasLaw& gas, double eps, double q2,
                          double phi_f) {
  require_positive_eps(eps, "density_from_speed");
  if (!(q2 >= 0.0)) {
    throw std::domain_error("density_from_speed: q2 must be non-negative");
  }
  const double y = eps * eps * (2.0 * phi_f - q2) / 2.0;
  if (!(y > gas.enthalpy_diff_inf())) {
    std::ostringstream msg;
    msg << "density_from_speed: vacuum state reached at q2 = " << q2
        << ", eps = " << eps << " (enthalpy argument " << y
        << " below limit " << gas.enthalpy_diff_inf() << ")";
    throw std::range_error(msg.str());
  }
  return gas.inv_enthalpy_diff(y);
}

double critical_density(const GasLaw& gas, double eps, double phi_f) {
  require_positive_eps(eps, "critical_density");
  if (!(phi_f >= 0.0)) {
    throw std::domain_error("critical_density: phi_f must be non-negative");
  }
  // Root of D(rho) = p'(rho)/2 + h(rho) - h(1) - eps^2 phi_f.
  // D is strictly increasing because 2 p' + rho p'' > 0.
  const double target = eps * eps * phi_f;
  auto excess = [&](double rho) {
    return gas.dpressure(rho) / 2.0 + gas.enthalpy_diff(rho) - target;
  };
  double lo = 1.0, hi = 1.0;
  int guard = 0;
  while (excess(lo) > 0.0) {
    lo *= 0.5;
    if (++guard > 600) {
      std::ostringstream msg;
      msg << "critical_density: failed to bracket root from below, "
          << "bracket [" << lo << ", " << hi << "], gas " << gas.describe();
      throw std::runtime_error(msg.str());
    }
  }
  guard = 0;
  while (excess(hi) < 0.0) {
    hi *= 2.0;
    if (++guard > 600) {
      std::ostringstream msg;
      msg << "critical_density: failed to bracket root from above, "
          << "bracket [" << lo << ", " << hi << "], gas " << gas.describe();
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
    if (hi - lo <= 1e-12 * std::max(1.0, hi)) break;
  }
  return 0.5 * (lo + hi);
}

double critical_speed(const GasLaw& gas, double eps, double phi_f) {
  return std::sqrt(gas.dpressure(critical_density(gas, eps, phi_f))) / eps;
}

double speed_at_mach(const GasLaw& gas, double eps, double theta,
                     double phi_f) {
  require_positive_eps(eps, "speed_at_mach");
  if (!(theta > 0.0 && theta <= 1.0)) {
    throw std::domain_error("speed_at_mach: theta must lie in (0, 1]");
  }
  const double q_cr = critical_speed(gas, eps, phi_f);
  if (theta == 1.0) return q_cr;
  // mach(q, rho(q^2)) is strictly increasing on [0, q_cr], 0 at q = 0 and
  // 1 at q = q_cr, so bisection cannot fail.
  auto mach_at = [&](double q) {
    return mach(gas, eps, q, density_from_speed(gas, eps, q * q, phi_f));
  };
  double lo = 0.0, hi = q_cr;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mach_at(mid) < theta) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-12 * std::max(1.0, q_cr)) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace machzero
