#include "machzero/force.hpp"

#include <cmath>
#include <stdexcept>

namespace machzero {

ForcePotential ForcePotential::zero() { return ForcePotential(); }

ForcePotential ForcePotential::linear(double g, double transverse_halfwidth) {
  if (!(transverse_halfwidth > 0.0)) {
    throw std::domain_error(
        "ForcePotential::linear: transverse halfwidth must be positive");
  }
  ForcePotential fp;
  fp.kind_ = Kind::linear;
  fp.g_ = g;
  fp.shift_ = std::abs(g) * transverse_halfwidth;
  fp.phi_star_ = 2.0 * std::abs(g) * transverse_halfwidth;
  return fp;
}

ForcePotential ForcePotential::bump(double height, double center_t,
                                    double center_z, double radius) {
  if (!(height >= 0.0)) {
    throw std::domain_error("ForcePotential::bump: height must be >= 0");
  }
  if (!(radius > 0.0)) {
    throw std::domain_error("ForcePotential::bump: radius must be positive");
  }
  ForcePotential fp;
  fp.kind_ = Kind::bump;
  fp.height_ = height;
  fp.center_t_ = center_t;
  fp.center_z_ = center_z;
  fp.radius_ = radius;
  fp.phi_star_ = height;
  return fp;
}

double ForcePotential::value(double x_t, double x_z) const {
  switch (kind_) {
    case Kind::zero:
      return 0.0;
    case Kind::linear: {
      const double v = g_ * x_t + shift_;
      // Outside the declared halfwidth the profile is clamped to the stated
      // range; the mesh sampling rejects such states up front.
      return std::min(std::max(v, 0.0), phi_star_);
    }
    case Kind::bump: {
      const double dt = (x_t - center_t_) / radius_;
      const double dz = (x_z - center_z_) / radius_;
      const double s2 = dt * dt + dz * dz;
      if (s2 >= 1.0) return 0.0;
      return height_ * std::exp(1.0 - 1.0 / (1.0 - s2));
    }
  }
  return 0.0;
}

std::array<double, 2> ForcePotential::gradient(double x_t, double x_z) const {
  switch (kind_) {
    case Kind::zero:
      return {0.0, 0.0};
    case Kind::linear:
      return {g_, 0.0};
    case Kind::bump: {
      const double dt = (x_t - center_t_) / radius_;
      const double dz = (x_z - center_z_) / radius_;
      const double s2 = dt * dt + dz * dz;
      if (s2 >= 1.0) return {0.0, 0.0};
      const double one_minus = 1.0 - s2;
      const double v = height_ * std::exp(1.0 - 1.0 / one_minus);
      const double dv_ds2 = -v / (one_minus * one_minus);
      return {dv_ds2 * 2.0 * dt / radius_, dv_ds2 * 2.0 * dz / radius_};
    }
  }
  return {0.0, 0.0};
}

}  // namespace machzero
