#ifndef MACHZERO_GEOMETRY_HPP_
#define MACHZERO_GEOMETRY_HPP_

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "machzero/force.hpp"

namespace machzero {

/// 2D points are stored as {transverse, axial}.  The cylinder coordinates
/// are (t, z) with t in (-1, 1) and z the axial coordinate; the physical
/// nozzle is the image of the cylinder under the inverse map.  All built-in
/// maps preserve the axial coordinate slice by slice.
using Point2 = std::array<double, 2>;
using Mat2 = std::array<std::array<double, 2>, 2>;

/// Invertible map between the physical nozzle and the reference cylinder
/// (-1,1) x R.  `to_cylinder` plays the role of the flattening map and
/// `from_cylinder` its inverse; `jacobian_from_cylinder` is the derivative
/// of the inverse map, used for mesh quality checks.
class NozzleMap {
 public:
  enum class Kind { straight, sinusoidal_wall, custom_analytic };

  static NozzleMap straight();
  /// Walls at x_t = +-(1 + amplitude * sin(2 pi z / period)).
  static NozzleMap sinusoidal(double amplitude, double period);
  static NozzleMap custom(std::function<Point2(Point2)> from_cylinder,
                          std::function<Point2(Point2)> to_cylinder,
                          std::function<Mat2(Point2)> jacobian_from_cylinder,
                          double transverse_halfwidth);

  Kind kind() const { return kind_; }
  double amplitude() const { return amplitude_; }
  double period() const { return period_; }

  Point2 from_cylinder(Point2 y) const;
  Point2 to_cylinder(Point2 x) const;
  Mat2 jacobian_from_cylinder(Point2 y) const;

  /// Upper bound on |x_t| over the image of the cylinder; used to normalize
  /// linear force potentials.
  double transverse_halfwidth() const { return halfwidth_; }

 private:
  NozzleMap() = default;
  double radius(double z) const;
  double dradius(double z) const;

  Kind kind_ = Kind::straight;
  double amplitude_ = 0.0;
  double period_ = 1.0;
  double halfwidth_ = 1.0;
  std::function<Point2(Point2)> from_fn_;
  std::function<Point2(Point2)> to_fn_;
  std::function<Mat2(Point2)> jac_fn_;
};

/// Structured quadrilateral mesh of the truncated nozzle |z| < L, built by
/// mapping a uniform grid of the cylinder through the nozzle map.  Immutable
/// after construction.
struct Mesh {
  enum class BoundaryTag { wall, inlet, outlet };

  struct QuadPoint {
    Point2 pos;                            // physical position
    double weight;                         // det(J) (2x2 Gauss weights are 1)
    std::array<Point2, 4> dshape;          // physical gradients of the shapes
  };

  struct BoundaryFacet {
    int n0, n1;
    BoundaryTag tag;
    int elem;
  };

  int nx = 0;                              // axial cells
  int nt = 0;                              // transverse cells
  double half_length = 0.0;                // L
  std::vector<Point2> nodes;               // physical coordinates
  std::vector<Point2> cyl_nodes;           // cylinder coordinates (t, z)
  std::vector<std::array<int, 4>> elems;   // CCW corners
  std::vector<QuadPoint> quad;             // 4 per element, element-major
  std::vector<BoundaryFacet> boundary;
  std::vector<int> inlet_nodes;            // z = -L, ascending node id
  double outlet_area = 0.0;                // |S_L^+|
  double inlet_area = 0.0;

  int n_nodes() const { return static_cast<int>(nodes.size()); }
  int n_elems() const { return static_cast<int>(elems.size()); }
  int n_quad() const { return static_cast<int>(quad.size()); }
  int node_id(int it, int ix) const { return ix * (nt + 1) + it; }
  int elem_id(int et, int ex) const { return ex * nt + et; }

  double axial_spacing() const { return 2.0 * half_length / nx; }
  double gridline_z(int j) const { return -half_length + j * axial_spacing(); }
  /// Axial coordinate of the element centroid (exact, slices are preserved).
  double elem_axial_center(int e) const;

  /// Gradient of a nodal field at an arbitrary reference point of an
  /// element (used by edge-flux diagnostics; solves re-use the cached
  /// quadrature gradients instead).
  Point2 grad_at(int elem, double xi, double eta,
                 std::span<const double> nodal) const;
  Point2 position_at(int elem, double xi, double eta) const;
};

Mesh build_mesh(const NozzleMap& map, double half_length, int nx, int nt);

/// A cross-section of the mesh: the set of element edges lying on the axial
/// gridline nearest to the requested position.  The requested position is
/// snapped to that gridline and the snap distance reported.
struct CrossSection {
  struct Facet {
    int n_lo, n_hi;
    int elem_up;    // axially below the section, -1 at the inlet
    int elem_down;  // axially above the section, -1 at the outlet
  };
  double requested = 0.0;
  double snapped = 0.0;
  double snap_offset = 0.0;
  double measure = 0.0;  // total facet length
  std::vector<Facet> facets;
};

CrossSection cross_section_facets(const Mesh& mesh, double a);

/// Axial window a < z < b.
struct Window {
  double a;
  double b;
};

/// Force potential sampled at the quadrature points of a mesh.
struct ForceField {
  std::vector<double> value;
  std::vector<Point2> grad;
  double phi_star = 0.0;
};

/// Samples phi_f and grad(phi_f) at every quadrature point and checks the
/// normalization 0 <= phi_f <= phi_star; a violation is a configuration
/// error.
ForceField force_potential_field(const ForcePotential& fp, const Mesh& mesh);

}  // namespace machzero

#endif  // MACHZERO_GEOMETRY_HPP_
