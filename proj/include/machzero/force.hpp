#ifndef MACHZERO_FORCE_HPP_
#define MACHZERO_FORCE_HPP_

#include <array>

namespace machzero {

/// Conservative-force potential phi_f with F = grad(phi_f), normalized so
/// that 0 <= phi_f <= phi_star on the declared computational domain.
/// Transverse gravity is the linear profile, shifted upward at construction
/// to make it non-negative.
class ForcePotential {
 public:
  enum class Kind { zero, linear, bump };

  static ForcePotential zero();

  /// phi_f = g * (x_t + halfwidth) for g >= 0 (mirrored for g < 0), where
  /// x_t is the transverse coordinate and halfwidth bounds |x_t| on the
  /// meshes this potential will be evaluated on.  phi_star = 2 |g| halfwidth.
  static ForcePotential linear(double g, double transverse_halfwidth);

  /// Smooth compactly supported bump of the given height centered at
  /// (center_t, center_z) with the given support radius.
  static ForcePotential bump(double height, double center_t, double center_z,
                             double radius);

  Kind kind() const { return kind_; }
  double phi_star() const { return phi_star_; }

  double value(double x_t, double x_z) const;
  std::array<double, 2> gradient(double x_t, double x_z) const;

 private:
  ForcePotential() = default;
  Kind kind_ = Kind::zero;
  double phi_star_ = 0.0;
  double g_ = 0.0;
  double shift_ = 0.0;
  double height_ = 0.0;
  double center_t_ = 0.0;
  double center_z_ = 0.0;
  double radius_ = 1.0;
};

}  // namespace machzero

#endif  // MACHZERO_FORCE_HPP_
