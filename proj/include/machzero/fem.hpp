#ifndef MACHZERO_FEM_HPP_
#define MACHZERO_FEM_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "machzero/cutoff.hpp"
#include "machzero/geometry.hpp"

namespace machzero {

/// Nodal coefficients of a potential on a mesh, together with the Dirichlet
/// mask of the inlet nodes (the discrete realization of the space of
/// potentials vanishing on the inlet section).
struct ScalarField {
  const Mesh* mesh = nullptr;
  std::vector<double> values;
  std::vector<std::uint8_t> dirichlet;
};

/// Zero field with the inlet nodes marked as constrained.
ScalarField make_field(const Mesh& mesh);

/// Gradient of the field at every quadrature point (element-major, 4 per
/// element).
std::vector<Point2> gradients_at_quad(const ScalarField& field);

/// Field values at every quadrature point.
std::vector<double> values_at_quad(const ScalarField& field);

/// Symmetric sparse matrix in CSR form over the mesh's node-to-node pattern.
class SparseMatrix {
 public:
  static SparseMatrix from_mesh_pattern(const Mesh& mesh);

  int n() const { return static_cast<int>(row_ptr_.size()) - 1; }
  void add(int i, int j, double v);
  void mult(std::span<const double> x, std::span<double> y) const;
  double diag(int i) const;

  /// Zeroes rows and columns of the marked nodes and puts 1 on their
  /// diagonal, preserving symmetry.
  void eliminate(std::span<const std::uint8_t> constrained);

  std::span<const int> row(int i) const;
  std::span<const double> row_values(int i) const;
  double max_asymmetry() const;

 private:
  std::vector<int> row_ptr_;
  std::vector<int> col_;
  std::vector<double> val_;
};

struct LinearSystem {
  SparseMatrix matrix;
  std::vector<double> rhs;
  std::vector<std::uint8_t> constrained;
};

/// Assembles entry (i,j) = sum_q w_q det_q grad(N_i) . grad(N_j) for a
/// per-quadrature-point weight w (pass an empty span for w = 1).  With
/// apply_dirichlet the inlet rows and columns are eliminated symmetrically.
/// Throws if any weight is non-positive, naming the quadrature point.
LinearSystem assemble_weighted_stiffness(const Mesh& mesh,
                                         std::span<const double> weight,
                                         bool apply_dirichlet = true);

/// Action of the weighted stiffness operator on a nodal vector, computed by
/// element loops without forming the matrix (used for conservative flux and
/// residual checks).
std::vector<double> apply_weighted_stiffness(const Mesh& mesh,
                                             std::span<const double> weight,
                                             std::span<const double> nodal);

/// Outlet load b_i = (m/|S_L^+|) int_{S_L^+} N_i ds; the components sum to m.
std::vector<double> outlet_flux_load(const Mesh& mesh, double m);

struct SolveResult {
  ScalarField field;
  int iterations = 0;
  double rel_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients down to |r| <= tol |b|.
/// Deterministic; throws after 10 n iterations with the residual history.
SolveResult solve_spd(const LinearSystem& system, const Mesh& mesh, double tol,
                      const std::vector<double>* initial = nullptr);

/// J(phi) = 1/2 int |grad phi|^2 - (m/|S_L^+|) int_{S_L^+} phi.
double functional_J(const ScalarField& field, double m);

/// I(phi; ref) = eps^-4 int [ G(|grad phi|^2) - G(|grad ref|^2)
///                            - grad ref . (grad phi - grad ref) ],
/// with G(L) = 1/2 int_0^L rhohat.  Evaluated through the algebraically
/// equivalent split 1/2 |grad phi - grad ref|^2
/// + 1/2 int_{|grad ref|^2}^{|grad phi|^2} (rhohat - 1), which removes the
/// eps^-4 cancellation; the remaining 1D integral uses adaptive Gauss
/// quadrature to 1e-12 relative.
double functional_I(const ScalarField& field, const ScalarField& ref,
                    const SubsonicCutoff& cutoff, double eps,
                    std::span<const double> force_value);

/// Conservative flux through a cross-section: the weighted-stiffness action
/// summed over the nodes at and downstream of the section.  Exactly m, up to
/// solver residuals, for a converged solve.
double flux_residual_mode(const ScalarField& field,
                          std::span<const double> weight,
                          const CrossSection& section);

/// Facet-quadrature flux sum of w dphi/dz ds, averaging the two element
/// traces; carries the usual O(h^2) skin discrepancy and is provided as a
/// diagnostic.  weight_fn receives (q2, position).
double flux_quadrature_mode(
    const ScalarField& field,
    const std::function<double(double, Point2)>& weight_fn,
    const CrossSection& section);

/// Window average of |grad phi|^2 over the elements whose centroid lies in
/// the window.  Throws std::range_error when the window captures nothing.
double window_avg_gradsq(const ScalarField& field, const Window& window);

struct PoincareResult {
  double ratio = 0.0;
  double deviation_norm = 0.0;  // || phi - mean ||_{L2(window)}
  double gradient_norm = 0.0;   // || grad phi ||_{L2(window)}
  bool constant_field = false;
};

/// || phi - P(phi) ||_{L2} / || grad phi ||_{L2} over a unit axial window.
PoincareResult poincare_check(const ScalarField& field, const Window& window);

}  // namespace machzero

#endif  // MACHZERO_FEM_HPP_
