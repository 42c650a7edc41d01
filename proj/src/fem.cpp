#include "machzero/fem.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace machzero {

namespace {

// Bilinear shape values at the 2x2 Gauss points, quadrature-point-major.
// Point order matches build_mesh: (xi, eta) = (-g,-g), (g,-g), (-g,g), (g,g).
struct ShapeTable {
  double n[4][4];
  ShapeTable() {
    const double g = 1.0 / std::sqrt(3.0);
    const double xi[4] = {-g, g, -g, g};
    const double eta[4] = {-g, -g, g, g};
    for (int q = 0; q < 4; ++q) {
      n[q][0] = 0.25 * (1.0 - xi[q]) * (1.0 - eta[q]);
      n[q][1] = 0.25 * (1.0 + xi[q]) * (1.0 - eta[q]);
      n[q][2] = 0.25 * (1.0 + xi[q]) * (1.0 + eta[q]);
      n[q][3] = 0.25 * (1.0 - xi[q]) * (1.0 + eta[q]);
    }
  }
};
const ShapeTable kShapes;

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

ScalarField make_field(const Mesh& mesh) {
  ScalarField f;
  f.mesh = &mesh;
  f.values.assign(mesh.n_nodes(), 0.0);
  f.dirichlet.assign(mesh.n_nodes(), 0);
  for (int n : mesh.inlet_nodes) f.dirichlet[n] = 1;
  return f;
}

std::vector<Point2> gradients_at_quad(const ScalarField& field) {
  const Mesh& mesh = *field.mesh;
  std::vector<Point2> g(mesh.n_quad(), {0.0, 0.0});
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const auto& c = mesh.elems[e];
    for (int q = 0; q < 4; ++q) {
      const auto& qp = mesh.quad[4 * e + q];
      double gt = 0.0, gz = 0.0;
      for (int a = 0; a < 4; ++a) {
        gt += qp.dshape[a][0] * field.values[c[a]];
        gz += qp.dshape[a][1] * field.values[c[a]];
      }
      g[4 * e + q] = {gt, gz};
    }
  }
  return g;
}

std::vector<double> values_at_quad(const ScalarField& field) {
  const Mesh& mesh = *field.mesh;
  std::vector<double> v(mesh.n_quad(), 0.0);
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const auto& c = mesh.elems[e];
    for (int q = 0; q < 4; ++q) {
      double s = 0.0;
      for (int a = 0; a < 4; ++a) s += kShapes.n[q][a] * field.values[c[a]];
      v[4 * e + q] = s;
    }
  }
  return v;
}

SparseMatrix SparseMatrix::from_mesh_pattern(const Mesh& mesh) {
  const int n = mesh.n_nodes();
  std::vector<std::set<int>> adj(n);
  for (const auto& c : mesh.elems) {
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) adj[c[a]].insert(c[b]);
    }
  }
  SparseMatrix m;
  m.row_ptr_.assign(n + 1, 0);
  for (int i = 0; i < n; ++i) {
    m.row_ptr_[i + 1] = m.row_ptr_[i] + static_cast<int>(adj[i].size());
  }
  m.col_.reserve(m.row_ptr_[n]);
  for (int i = 0; i < n; ++i) {
    for (int j : adj[i]) m.col_.push_back(j);
  }
  m.val_.assign(m.col_.size(), 0.0);
  return m;
}

void SparseMatrix::add(int i, int j, double v) {
  for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
    if (col_[k] == j) {
      val_[k] += v;
      return;
    }
  }
  throw std::logic_error("SparseMatrix::add: entry outside pattern");
}

void SparseMatrix::mult(std::span<const double> x, std::span<double> y) const {
  const int nn = n();
  for (int i = 0; i < nn; ++i) {
    double s = 0.0;
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      s += val_[k] * x[col_[k]];
    }
    y[i] = s;
  }
}

double SparseMatrix::diag(int i) const {
  for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
    if (col_[k] == i) return val_[k];
  }
  return 0.0;
}

void SparseMatrix::eliminate(std::span<const std::uint8_t> constrained) {
  const int nn = n();
  for (int i = 0; i < nn; ++i) {
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const int j = col_[k];
      if (constrained[i] || constrained[j]) {
        val_[k] = (i == j) ? 1.0 : 0.0;
      }
    }
  }
}

std::span<const int> SparseMatrix::row(int i) const {
  return {col_.data() + row_ptr_[i],
          static_cast<std::size_t>(row_ptr_[i + 1] - row_ptr_[i])};
}

std::span<const double> SparseMatrix::row_values(int i) const {
  return {val_.data() + row_ptr_[i],
          static_cast<std::size_t>(row_ptr_[i + 1] - row_ptr_[i])};
}

double SparseMatrix::max_asymmetry() const {
  double worst = 0.0;
  const int nn = n();
  for (int i = 0; i < nn; ++i) {
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const int j = col_[k];
      if (j < i) continue;
      double vt = 0.0;
      for (int l = row_ptr_[j]; l < row_ptr_[j + 1]; ++l) {
        if (col_[l] == i) {
          vt = val_[l];
          break;
        }
      }
      worst = std::max(worst, std::abs(val_[k] - vt));
    }
  }
  return worst;
}

LinearSystem assemble_weighted_stiffness(const Mesh& mesh,
                                         std::span<const double> weight,
                                         bool apply_dirichlet) {
  if (!weight.empty() && static_cast<int>(weight.size()) != mesh.n_quad()) {
    throw std::invalid_argument(
        "assemble_weighted_stiffness: weight size does not match the mesh");
  }
  LinearSystem sys;
  sys.matrix = SparseMatrix::from_mesh_pattern(mesh);
  sys.rhs.assign(mesh.n_nodes(), 0.0);
  sys.constrained.assign(mesh.n_nodes(), 0);
  for (int n : mesh.inlet_nodes) sys.constrained[n] = 1;

  for (int e = 0; e < mesh.n_elems(); ++e) {
    const auto& c = mesh.elems[e];
    double ke[4][4] = {};
    for (int q = 0; q < 4; ++q) {
      const int iq = 4 * e + q;
      const double w = weight.empty() ? 1.0 : weight[iq];
      if (!(w > 0.0)) {
        std::ostringstream msg;
        msg << "assemble_weighted_stiffness: non-positive weight " << w
            << " at quadrature point " << iq << " (element " << e
            << ", position (" << mesh.quad[iq].pos[0] << ", "
            << mesh.quad[iq].pos[1] << "))";
        throw std::runtime_error(msg.str());
      }
      const auto& qp = mesh.quad[iq];
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
          ke[a][b] += w * qp.weight *
                      (qp.dshape[a][0] * qp.dshape[b][0] +
                       qp.dshape[a][1] * qp.dshape[b][1]);
        }
      }
    }
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) sys.matrix.add(c[a], c[b], ke[a][b]);
    }
  }
  if (apply_dirichlet) sys.matrix.eliminate(sys.constrained);
  return sys;
}

std::vector<double> apply_weighted_stiffness(const Mesh& mesh,
                                             std::span<const double> weight,
                                             std::span<const double> nodal) {
  std::vector<double> out(mesh.n_nodes(), 0.0);
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const auto& c = mesh.elems[e];
    for (int q = 0; q < 4; ++q) {
      const int iq = 4 * e + q;
      const auto& qp = mesh.quad[iq];
      const double w = weight.empty() ? 1.0 : weight[iq];
      double gt = 0.0, gz = 0.0;
      for (int a = 0; a < 4; ++a) {
        gt += qp.dshape[a][0] * nodal[c[a]];
        gz += qp.dshape[a][1] * nodal[c[a]];
      }
      for (int a = 0; a < 4; ++a) {
        out[c[a]] += w * qp.weight *
                     (gt * qp.dshape[a][0] + gz * qp.dshape[a][1]);
      }
    }
  }
  return out;
}

std::vector<double> outlet_flux_load(const Mesh& mesh, double m) {
  std::vector<double> b(mesh.n_nodes(), 0.0);
  const double scale = m / mesh.outlet_area;
  for (const auto& f : mesh.boundary) {
    if (f.tag != Mesh::BoundaryTag::outlet) continue;
    const double dt = mesh.nodes[f.n1][0] - mesh.nodes[f.n0][0];
    const double dz = mesh.nodes[f.n1][1] - mesh.nodes[f.n0][1];
    const double len = std::sqrt(dt * dt + dz * dz);
    b[f.n0] += scale * len / 2.0;
    b[f.n1] += scale * len / 2.0;
  }
  return b;
}

SolveResult solve_spd(const LinearSystem& system, const Mesh& mesh, double tol,
                      const std::vector<double>* initial) {
  if (!(tol > 0.0 && tol < 1.0)) {
    throw std::domain_error("solve_spd: tolerance must lie in (0, 1)");
  }
  const int n = system.matrix.n();
  SolveResult res;
  res.field = make_field(mesh);

  std::vector<double> b = system.rhs;
  for (int i = 0; i < n; ++i) {
    if (system.constrained[i]) b[i] = 0.0;
  }
  const double nb = norm2(b);
  if (nb == 0.0) return res;  // zero load, zero field

  std::vector<double>& x = res.field.values;
  if (initial) {
    x = *initial;
    for (int i = 0; i < n; ++i) {
      if (system.constrained[i]) x[i] = 0.0;
    }
  }

  std::vector<double> r(n), z(n), p(n), q(n), idiag(n);
  for (int i = 0; i < n; ++i) {
    const double d = system.matrix.diag(i);
    if (!(d > 0.0)) {
      throw std::runtime_error("solve_spd: non-positive diagonal entry");
    }
    idiag[i] = 1.0 / d;
  }
  system.matrix.mult(x, r);
  for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
  for (int i = 0; i < n; ++i) z[i] = idiag[i] * r[i];
  p = z;
  double rz = dot(r, z);

  const int cap = 10 * n;
  std::vector<double> history;
  for (int it = 0; it <= cap; ++it) {
    const double rn = norm2(r);
    history.push_back(rn / nb);
    if (rn <= tol * nb) {
      // the recurrence residual drifts from the true one; certify against
      // b - A x and restart from the true residual if needed
      std::vector<double> true_r(n);
      system.matrix.mult(x, true_r);
      for (int i = 0; i < n; ++i) true_r[i] = b[i] - true_r[i];
      const double tn = norm2(true_r);
      if (tn <= tol * nb) {
        res.iterations = it;
        res.rel_residual = tn / nb;
        return res;
      }
      r = std::move(true_r);
      for (int i = 0; i < n; ++i) z[i] = idiag[i] * r[i];
      p = z;
      rz = dot(r, z);
    }
    if (it == cap) break;
    system.matrix.mult(p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0)) {
      throw std::runtime_error(
          "solve_spd: operator is not positive definite (p.Ap <= 0)");
    }
    const double alpha = rz / pq;
    for (int i = 0; i < n; ++i) x[i] += alpha * p[i];
    for (int i = 0; i < n; ++i) r[i] -= alpha * q[i];
    for (int i = 0; i < n; ++i) z[i] = idiag[i] * r[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    rz = rz_new;
  }
  std::ostringstream msg;
  msg << "solve_spd: iteration cap " << cap
      << " exceeded; relative residuals:";
  const std::size_t keep = 5;
  for (std::size_t i = 0; i < std::min(keep, history.size()); ++i) {
    msg << " " << history[i];
  }
  msg << " ...";
  for (std::size_t i = history.size() > keep ? history.size() - keep : 0;
       i < history.size(); ++i) {
    msg << " " << history[i];
  }
  throw std::runtime_error(msg.str());
}

double functional_J(const ScalarField& field, double m) {
  const Mesh& mesh = *field.mesh;
  double grad_term = 0.0;
  const auto grads = gradients_at_quad(field);
  for (int q = 0; q < mesh.n_quad(); ++q) {
    const auto& g = grads[q];
    grad_term += mesh.quad[q].weight * (g[0] * g[0] + g[1] * g[1]);
  }
  double outlet_term = 0.0;
  for (const auto& f : mesh.boundary) {
    if (f.tag != Mesh::BoundaryTag::outlet) continue;
    const double dt = mesh.nodes[f.n1][0] - mesh.nodes[f.n0][0];
    const double dz = mesh.nodes[f.n1][1] - mesh.nodes[f.n0][1];
    const double len = std::sqrt(dt * dt + dz * dz);
    outlet_term += len * 0.5 * (field.values[f.n0] + field.values[f.n1]);
  }
  return 0.5 * grad_term - m / mesh.outlet_area * outlet_term;
}

namespace {

// Adaptive 4-point Gauss-Legendre on [a, b], refined until the halved
// estimate agrees to rel_tol.
class AdaptiveGauss {
 public:
  AdaptiveGauss(std::function<double(double)> f, double rel_tol)
      : f_(std::move(f)), rel_tol_(rel_tol) {}

  double integrate(double a, double b) const {
    const double whole = gauss4(a, b);
    return refine(a, b, whole, 0);
  }

 private:
  double gauss4(double a, double b) const {
    static const double xs[2] = {0.3399810435848563, 0.8611363115940526};
    static const double ws[2] = {0.6521451548625461, 0.3478548451374538};
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 2; ++i) {
      s += ws[i] * (f_(mid - half * xs[i]) + f_(mid + half * xs[i]));
    }
    return s * half;
  }

  double refine(double a, double b, double whole, int depth) const {
    const double mid = 0.5 * (a + b);
    const double left = gauss4(a, mid);
    const double right = gauss4(mid, b);
    const double sum = left + right;
    if (depth >= 30 ||
        std::abs(sum - whole) <= rel_tol_ * std::abs(sum) + 1e-300) {
      return sum;
    }
    return refine(a, mid, left, depth + 1) + refine(mid, b, right, depth + 1);
  }

  std::function<double(double)> f_;
  double rel_tol_;
};

}  // namespace

double functional_I(const ScalarField& field, const ScalarField& ref,
                    const SubsonicCutoff& cutoff, double eps,
                    std::span<const double> force_value) {
  const Mesh& mesh = *field.mesh;
  if (ref.mesh != field.mesh) {
    throw std::invalid_argument("functional_I: fields on different meshes");
  }
  const auto g = gradients_at_quad(field);
  const auto gr = gradients_at_quad(ref);
  const double eps4 = eps * eps * eps * eps;
  double acc = 0.0;
  for (int q = 0; q < mesh.n_quad(); ++q) {
    const double dt = g[q][0] - gr[q][0];
    const double dz = g[q][1] - gr[q][1];
    const double lam = g[q][0] * g[q][0] + g[q][1] * g[q][1];
    const double lam_ref = gr[q][0] * gr[q][0] + gr[q][1] * gr[q][1];
    double point = 0.5 * (dt * dt + dz * dz);
    if (lam != lam_ref) {
      const double phi = force_value[q];
      AdaptiveGauss quadrature(
          [&](double l) { return cutoff.density(eps, l, phi) - 1.0; }, 1e-12);
      // Integrate piecewise across the branch knots of rhohat.
      const double lo = std::min(lam_ref, lam);
      const double hi = std::max(lam_ref, lam);
      const double knot0 = cutoff.knot_speed_sq(phi);
      const double knot1 = cutoff.blend_end_speed_sq(phi);
      double pieces[4] = {lo, std::clamp(knot0, lo, hi),
                          std::clamp(knot1, lo, hi), hi};
      double integral = 0.0;
      for (int s = 0; s < 3; ++s) {
        if (pieces[s + 1] > pieces[s]) {
          integral += quadrature.integrate(pieces[s], pieces[s + 1]);
        }
      }
      if (lam < lam_ref) integral = -integral;
      point += 0.5 * integral;
    }
    acc += mesh.quad[q].weight * point / eps4;
  }
  return acc;
}

double flux_residual_mode(const ScalarField& field,
                          std::span<const double> weight,
                          const CrossSection& section) {
  const Mesh& mesh = *field.mesh;
  const std::vector<double> action =
      apply_weighted_stiffness(mesh, weight, field.values);
  const double h = mesh.axial_spacing();
  int j = static_cast<int>(
      std::lround((section.snapped + mesh.half_length) / h));
  j = std::max(1, j);  // at the inlet, sum strictly downstream of it
  double flux = 0.0;
  for (int ix = j; ix <= mesh.nx; ++ix) {
    for (int it = 0; it <= mesh.nt; ++it) {
      flux += action[mesh.node_id(it, ix)];
    }
  }
  return flux;
}

double flux_quadrature_mode(
    const ScalarField& field,
    const std::function<double(double, Point2)>& weight_fn,
    const CrossSection& section) {
  const Mesh& mesh = *field.mesh;
  const double gp = 1.0 / std::sqrt(3.0);
  double flux = 0.0;
  for (const auto& f : section.facets) {
    const double dt = mesh.nodes[f.n_hi][0] - mesh.nodes[f.n_lo][0];
    const double dz = mesh.nodes[f.n_hi][1] - mesh.nodes[f.n_lo][1];
    const double len = std::sqrt(dt * dt + dz * dz);
    for (double s : {-gp, gp}) {
      double value = 0.0;
      int sides = 0;
      if (f.elem_up >= 0) {
        const Point2 g = mesh.grad_at(f.elem_up, s, 1.0, field.values);
        const Point2 pos = mesh.position_at(f.elem_up, s, 1.0);
        value += weight_fn(g[0] * g[0] + g[1] * g[1], pos) * g[1];
        ++sides;
      }
      if (f.elem_down >= 0) {
        const Point2 g = mesh.grad_at(f.elem_down, s, -1.0, field.values);
        const Point2 pos = mesh.position_at(f.elem_down, s, -1.0);
        value += weight_fn(g[0] * g[0] + g[1] * g[1], pos) * g[1];
        ++sides;
      }
      flux += value / sides * len / 2.0;
    }
  }
  return flux;
}

double window_avg_gradsq(const ScalarField& field, const Window& window) {
  const Mesh& mesh = *field.mesh;
  const auto grads = gradients_at_quad(field);
  double num = 0.0, vol = 0.0;
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const double zc = mesh.elem_axial_center(e);
    if (zc <= window.a || zc >= window.b) continue;
    for (int q = 0; q < 4; ++q) {
      const int iq = 4 * e + q;
      const auto& g = grads[iq];
      num += mesh.quad[iq].weight * (g[0] * g[0] + g[1] * g[1]);
      vol += mesh.quad[iq].weight;
    }
  }
  if (vol == 0.0) {
    std::ostringstream msg;
    msg << "window_avg_gradsq: window (" << window.a << ", " << window.b
        << ") captures no elements";
    throw std::range_error(msg.str());
  }
  return num / vol;
}

PoincareResult poincare_check(const ScalarField& field, const Window& window) {
  const Mesh& mesh = *field.mesh;
  const auto grads = gradients_at_quad(field);
  const auto vals = values_at_quad(field);
  double vol = 0.0, mean = 0.0;
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const double zc = mesh.elem_axial_center(e);
    if (zc <= window.a || zc >= window.b) continue;
    for (int q = 0; q < 4; ++q) {
      const int iq = 4 * e + q;
      vol += mesh.quad[iq].weight;
      mean += mesh.quad[iq].weight * vals[iq];
    }
  }
  if (vol == 0.0) {
    throw std::range_error("poincare_check: window captures no elements");
  }
  mean /= vol;
  double dev2 = 0.0, grad2 = 0.0;
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const double zc = mesh.elem_axial_center(e);
    if (zc <= window.a || zc >= window.b) continue;
    for (int q = 0; q < 4; ++q) {
      const int iq = 4 * e + q;
      const double d = vals[iq] - mean;
      dev2 += mesh.quad[iq].weight * d * d;
      const auto& g = grads[iq];
      grad2 += mesh.quad[iq].weight * (g[0] * g[0] + g[1] * g[1]);
    }
  }
  PoincareResult res;
  res.deviation_norm = std::sqrt(dev2);
  res.gradient_norm = std::sqrt(grad2);
  if (res.gradient_norm <= 1e-14 * std::max(1.0, std::abs(mean))) {
    res.constant_field = true;
    res.ratio = 0.0;
  } else {
    res.ratio = res.deviation_norm / res.gradient_norm;
  }
  return res;
}

}  // namespace machzero
