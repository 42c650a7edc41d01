#include "machzero/geometry.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace machzero {

NozzleMap NozzleMap::straight() {
  NozzleMap map;
  map.kind_ = Kind::straight;
  map.halfwidth_ = 1.0;
  return map;
}

NozzleMap NozzleMap::sinusoidal(double amplitude, double period) {
  if (!(amplitude >= 0.0 && amplitude < 1.0)) {
    throw std::domain_error(
        "NozzleMap::sinusoidal: amplitude must lie in [0, 1)");
  }
  if (!(period > 0.0)) {
    throw std::domain_error("NozzleMap::sinusoidal: period must be positive");
  }
  NozzleMap map;
  map.kind_ = Kind::sinusoidal_wall;
  map.amplitude_ = amplitude;
  map.period_ = period;
  map.halfwidth_ = 1.0 + amplitude;
  return map;
}

NozzleMap NozzleMap::custom(std::function<Point2(Point2)> from_cylinder,
                            std::function<Point2(Point2)> to_cylinder,
                            std::function<Mat2(Point2)> jacobian_from_cylinder,
                            double transverse_halfwidth) {
  NozzleMap map;
  map.kind_ = Kind::custom_analytic;
  map.from_fn_ = std::move(from_cylinder);
  map.to_fn_ = std::move(to_cylinder);
  map.jac_fn_ = std::move(jacobian_from_cylinder);
  map.halfwidth_ = transverse_halfwidth;
  return map;
}

double NozzleMap::radius(double z) const {
  if (kind_ == Kind::straight) return 1.0;
  return 1.0 + amplitude_ * std::sin(2.0 * std::numbers::pi * z / period_);
}

double NozzleMap::dradius(double z) const {
  if (kind_ == Kind::straight) return 0.0;
  const double k = 2.0 * std::numbers::pi / period_;
  return amplitude_ * k * std::cos(k * z);
}

Point2 NozzleMap::from_cylinder(Point2 y) const {
  if (kind_ == Kind::custom_analytic) return from_fn_(y);
  return {y[0] * radius(y[1]), y[1]};
}

Point2 NozzleMap::to_cylinder(Point2 x) const {
  if (kind_ == Kind::custom_analytic) return to_fn_(x);
  return {x[0] / radius(x[1]), x[1]};
}

Mat2 NozzleMap::jacobian_from_cylinder(Point2 y) const {
  if (kind_ == Kind::custom_analytic) return jac_fn_(y);
  return {{{radius(y[1]), y[0] * dradius(y[1])}, {0.0, 1.0}}};
}

double Mesh::elem_axial_center(int e) const {
  const auto& c = elems[e];
  return 0.25 * (cyl_nodes[c[0]][1] + cyl_nodes[c[1]][1] +
                 cyl_nodes[c[2]][1] + cyl_nodes[c[3]][1]);
}

namespace {

// Bilinear shapes on [-1,1]^2, corners ordered (-1,-1),(1,-1),(1,1),(-1,1).
void shape_values(double xi, double eta, double n[4]) {
  n[0] = 0.25 * (1.0 - xi) * (1.0 - eta);
  n[1] = 0.25 * (1.0 + xi) * (1.0 - eta);
  n[2] = 0.25 * (1.0 + xi) * (1.0 + eta);
  n[3] = 0.25 * (1.0 - xi) * (1.0 + eta);
}

void shape_grads(double xi, double eta, double dxi[4], double deta[4]) {
  dxi[0] = -0.25 * (1.0 - eta);
  dxi[1] = 0.25 * (1.0 - eta);
  dxi[2] = 0.25 * (1.0 + eta);
  dxi[3] = -0.25 * (1.0 + eta);
  deta[0] = -0.25 * (1.0 - xi);
  deta[1] = -0.25 * (1.0 + xi);
  deta[2] = 0.25 * (1.0 + xi);
  deta[3] = 0.25 * (1.0 - xi);
}

struct RefPointEval {
  Point2 pos;
  double det;
  std::array<Point2, 4> dshape;
};

RefPointEval eval_ref_point(const Mesh& mesh, int elem, double xi,
                            double eta) {
  double n[4], dxi[4], deta[4];
  shape_values(xi, eta, n);
  shape_grads(xi, eta, dxi, deta);
  const auto& c = mesh.elems[elem];
  double j00 = 0.0, j01 = 0.0, j10 = 0.0, j11 = 0.0;
  RefPointEval out;
  out.pos = {0.0, 0.0};
  for (int a = 0; a < 4; ++a) {
    const Point2& xa = mesh.nodes[c[a]];
    out.pos[0] += n[a] * xa[0];
    out.pos[1] += n[a] * xa[1];
    j00 += dxi[a] * xa[0];   // d x_t / d xi
    j10 += dxi[a] * xa[1];   // d x_z / d xi
    j01 += deta[a] * xa[0];  // d x_t / d eta
    j11 += deta[a] * xa[1];  // d x_z / d eta
  }
  out.det = j00 * j11 - j01 * j10;
  // grad_x N = J^{-T} grad_ref N
  for (int a = 0; a < 4; ++a) {
    out.dshape[a][0] = (j11 * dxi[a] - j10 * deta[a]) / out.det;
    out.dshape[a][1] = (-j01 * dxi[a] + j00 * deta[a]) / out.det;
  }
  return out;
}

}  // namespace

Point2 Mesh::grad_at(int elem, double xi, double eta,
                     std::span<const double> nodal) const {
  const RefPointEval ev = eval_ref_point(*this, elem, xi, eta);
  Point2 g = {0.0, 0.0};
  const auto& c = elems[elem];
  for (int a = 0; a < 4; ++a) {
    g[0] += ev.dshape[a][0] * nodal[c[a]];
    g[1] += ev.dshape[a][1] * nodal[c[a]];
  }
  return g;
}

Point2 Mesh::position_at(int elem, double xi, double eta) const {
  return eval_ref_point(*this, elem, xi, eta).pos;
}

Mesh build_mesh(const NozzleMap& map, double half_length, int nx, int nt) {
  if (!(half_length > 0.0)) {
    throw std::domain_error("build_mesh: half-length must be positive");
  }
  if (nx < 2 || nt < 2) {
    throw std::domain_error("build_mesh: need nx >= 2 and nt >= 2");
  }
  Mesh mesh;
  mesh.nx = nx;
  mesh.nt = nt;
  mesh.half_length = half_length;

  mesh.nodes.reserve((nx + 1) * (nt + 1));
  mesh.cyl_nodes.reserve((nx + 1) * (nt + 1));
  for (int ix = 0; ix <= nx; ++ix) {
    const double z = -half_length + 2.0 * half_length * ix / nx;
    for (int it = 0; it <= nt; ++it) {
      const double t = -1.0 + 2.0 * it / nt;
      const Point2 y = {t, z};
      mesh.cyl_nodes.push_back(y);
      mesh.nodes.push_back(map.from_cylinder(y));
    }
  }

  mesh.elems.reserve(nx * nt);
  for (int ex = 0; ex < nx; ++ex) {
    for (int et = 0; et < nt; ++et) {
      mesh.elems.push_back({mesh.node_id(et, ex), mesh.node_id(et + 1, ex),
                            mesh.node_id(et + 1, ex + 1),
                            mesh.node_id(et, ex + 1)});
    }
  }

  const double gp = 1.0 / std::sqrt(3.0);
  const double gauss[2] = {-gp, gp};
  mesh.quad.reserve(4 * mesh.n_elems());
  for (int e = 0; e < mesh.n_elems(); ++e) {
    for (int qe = 0; qe < 2; ++qe) {    // eta (axial) index
      for (int qx = 0; qx < 2; ++qx) {  // xi (transverse) index
        const RefPointEval ev = eval_ref_point(mesh, e, gauss[qx], gauss[qe]);
        if (!(ev.det > 0.0)) {
          std::ostringstream msg;
          msg << "build_mesh: non-invertible Jacobian (det = " << ev.det
              << ") at quadrature point (" << ev.pos[0] << ", " << ev.pos[1]
              << ") of element " << e;
          throw std::runtime_error(msg.str());
        }
        Mesh::QuadPoint qp;
        qp.pos = ev.pos;
        qp.weight = ev.det;
        qp.dshape = ev.dshape;
        mesh.quad.push_back(qp);
      }
    }
  }

  auto facet = [&](int n0, int n1, Mesh::BoundaryTag tag, int elem) {
    mesh.boundary.push_back({n0, n1, tag, elem});
  };
  for (int et = 0; et < nt; ++et) {
    facet(mesh.node_id(et, 0), mesh.node_id(et + 1, 0),
          Mesh::BoundaryTag::inlet, mesh.elem_id(et, 0));
    facet(mesh.node_id(et, nx), mesh.node_id(et + 1, nx),
          Mesh::BoundaryTag::outlet, mesh.elem_id(et, nx - 1));
  }
  for (int ex = 0; ex < nx; ++ex) {
    facet(mesh.node_id(0, ex), mesh.node_id(0, ex + 1),
          Mesh::BoundaryTag::wall, mesh.elem_id(0, ex));
    facet(mesh.node_id(nt, ex), mesh.node_id(nt, ex + 1),
          Mesh::BoundaryTag::wall, mesh.elem_id(nt - 1, ex));
  }

  auto seg_len = [&](int n0, int n1) {
    const double dt = mesh.nodes[n1][0] - mesh.nodes[n0][0];
    const double dz = mesh.nodes[n1][1] - mesh.nodes[n0][1];
    return std::sqrt(dt * dt + dz * dz);
  };
  for (const auto& f : mesh.boundary) {
    if (f.tag == Mesh::BoundaryTag::outlet) {
      mesh.outlet_area += seg_len(f.n0, f.n1);
    } else if (f.tag == Mesh::BoundaryTag::inlet) {
      mesh.inlet_area += seg_len(f.n0, f.n1);
    }
  }
  if (!(mesh.outlet_area > 0.0)) {
    throw std::runtime_error("build_mesh: outlet has zero measure");
  }

  for (int it = 0; it <= nt; ++it) {
    mesh.inlet_nodes.push_back(mesh.node_id(it, 0));
  }
  return mesh;
}

CrossSection cross_section_facets(const Mesh& mesh, double a) {
  const double L = mesh.half_length;
  if (!(a >= -L && a <= L)) {
    std::ostringstream msg;
    msg << "cross_section_facets: position " << a << " outside [-" << L
        << ", " << L << "]";
    throw std::range_error(msg.str());
  }
  const double h = mesh.axial_spacing();
  int j = static_cast<int>(std::lround((a + L) / h));
  j = std::max(0, std::min(mesh.nx, j));

  CrossSection cs;
  cs.requested = a;
  cs.snapped = mesh.gridline_z(j);
  cs.snap_offset = std::abs(a - cs.snapped);
  for (int et = 0; et < mesh.nt; ++et) {
    CrossSection::Facet f;
    f.n_lo = mesh.node_id(et, j);
    f.n_hi = mesh.node_id(et + 1, j);
    f.elem_up = (j > 0) ? mesh.elem_id(et, j - 1) : -1;
    f.elem_down = (j < mesh.nx) ? mesh.elem_id(et, j) : -1;
    const double dt = mesh.nodes[f.n_hi][0] - mesh.nodes[f.n_lo][0];
    const double dz = mesh.nodes[f.n_hi][1] - mesh.nodes[f.n_lo][1];
    cs.measure += std::sqrt(dt * dt + dz * dz);
    cs.facets.push_back(f);
  }
  return cs;
}

ForceField force_potential_field(const ForcePotential& fp, const Mesh& mesh) {
  ForceField field;
  field.phi_star = fp.phi_star();
  field.value.reserve(mesh.n_quad());
  field.grad.reserve(mesh.n_quad());
  const double slack = 1e-12 * std::max(1.0, fp.phi_star());
  for (const auto& qp : mesh.quad) {
    const double v = fp.value(qp.pos[0], qp.pos[1]);
    if (v < -slack || v > fp.phi_star() + slack) {
      std::ostringstream msg;
      msg << "force_potential_field: value " << v << " at (" << qp.pos[0]
          << ", " << qp.pos[1] << ") violates 0 <= phi_f <= "
          << fp.phi_star();
      throw std::runtime_error(msg.str());
    }
    field.value.push_back(v);
    field.grad.push_back(fp.gradient(qp.pos[0], qp.pos[1]));
  }
  return field;
}

}  // namespace machzero
