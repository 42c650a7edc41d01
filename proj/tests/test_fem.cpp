#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "machzero/fem.hpp"

using namespace machzero;

namespace {

// Dense Gaussian elimination with partial pivoting, the reference solver
// for small systems.
std::vector<double> dense_lu_solve(const LinearSystem& sys) {
  const int n = sys.matrix.n();
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    const auto cols = sys.matrix.row(i);
    const auto vals = sys.matrix.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) a[i][cols[k]] = vals[k];
  }
  std::vector<double> b = sys.rhs;
  for (int i = 0; i < n; ++i) {
    if (sys.constrained[i]) b[i] = 0.0;
  }
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a[r][c] * x[c];
    x[r] = s / a[r][r];
  }
  return x;
}

ScalarField linear_field(const Mesh& mesh, double a, double bt, double bz) {
  ScalarField f = make_field(mesh);
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    f.values[i] = a + bt * mesh.nodes[i][0] + bz * mesh.nodes[i][1];
  }
  return f;
}

}  // namespace

TEST_CASE("unit-square element stiffness") {
  // 2x2 mesh of unit squares; the corner rows expose the element matrix:
  // diagonal 2/3, edge neighbours -1/6, opposite corner -1/3.
  const Mesh mesh = build_mesh(NozzleMap::straight(), 1.0, 2, 2);
  const LinearSystem sys = assemble_weighted_stiffness(mesh, {}, false);
  const int corner = mesh.node_id(0, 0);
  CHECK(sys.matrix.diag(corner) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  const auto cols = sys.matrix.row(corner);
  const auto vals = sys.matrix.row_values(corner);
  for (std::size_t k = 0; k < cols.size(); ++k) {
    if (cols[k] == mesh.node_id(1, 0) || cols[k] == mesh.node_id(0, 1)) {
      CHECK(vals[k] == doctest::Approx(-1.0 / 6.0).epsilon(1e-13));
    } else if (cols[k] == mesh.node_id(1, 1)) {
      CHECK(vals[k] == doctest::Approx(-1.0 / 3.0).epsilon(1e-13));
    }
  }
}

TEST_CASE("constant weight scales the matrix linearly") {
  const Mesh mesh = build_mesh(NozzleMap::sinusoidal(0.2, 4.0), 1.0, 4, 3);
  const LinearSystem base = assemble_weighted_stiffness(mesh, {}, false);
  const std::vector<double> w(mesh.n_quad(), 2.75);
  const LinearSystem scaled = assemble_weighted_stiffness(mesh, w, false);
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    const auto a = base.matrix.row_values(i);
    const auto b = scaled.matrix.row_values(i);
    for (std::size_t k = 0; k < a.size(); ++k) {
      CHECK(b[k] == doctest::Approx(2.75 * a[k]).epsilon(1e-13));
    }
  }
}

TEST_CASE("interior row sums vanish before constraints") {
  const Mesh mesh = build_mesh(NozzleMap::straight(), 1.0, 4, 4);
  const LinearSystem sys = assemble_weighted_stiffness(mesh, {}, false);
  for (int it = 1; it < mesh.nt; ++it) {
    for (int ix = 1; ix < mesh.nx; ++ix) {
      const auto vals = sys.matrix.row_values(mesh.node_id(it, ix));
      double sum = 0.0;
      for (double v : vals) sum += v;
      CHECK(std::abs(sum) < 1e-14);
    }
  }
}

TEST_CASE("assembled matrix is symmetric") {
  const Mesh mesh = build_mesh(NozzleMap::sinusoidal(0.15, 3.0), 2.0, 8, 5);
  std::vector<double> w(mesh.n_quad());
  for (int q = 0; q < mesh.n_quad(); ++q) w[q] = 1.0 + 0.3 * std::sin(q);
  const LinearSystem sys = assemble_weighted_stiffness(mesh, w);
  CHECK(sys.matrix.max_asymmetry() <= 1e-14);
}

TEST_CASE("non-positive weights are rejected with the quadrature point") {
  const Mesh mesh = build_mesh(NozzleMap::straight(), 1.0, 2, 2);
  std::vector<double> w(mesh.n_quad(), 1.0);
  w[7] = -0.5;
  CHECK_THROWS_WITH_AS(assemble_weighted_stiffness(mesh, w),
                       doctest::Contains("quadrature point 7"),
                       std::runtime_error);
}

TEST_CASE("outlet load sums to the mass flux") {
  const Mesh straight = build_mesh(NozzleMap::straight(), 1.0, 4, 2);
  auto total = [](const std::vector<double>& b) {
    double s = 0.0;
    for (double v : b) s += v;
    return s;
  };
  CHECK(total(outlet_flux_load(straight, 1.0)) ==
        doctest::Approx(1.0).epsilon(1e-14));
  for (double v : outlet_flux_load(straight, 0.0)) CHECK(v == 0.0);
  const Mesh wavy = build_mesh(NozzleMap::sinusoidal(0.2, 4.0), 4.0, 32, 8);
  CHECK(total(outlet_flux_load(wavy, 2.5)) ==
        doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("conjugate gradients against dense elimination") {
  const Mesh mesh = build_mesh(NozzleMap::sinusoidal(0.2, 4.0), 1.5, 4, 3);
  REQUIRE(mesh.n_nodes() <= 100);
  LinearSystem sys = assemble_weighted_stiffness(mesh, {});
  sys.rhs = outlet_flux_load(mesh, 1.3);
  const SolveResult it = solve_spd(sys, mesh, 1e-14);
  const std::vector<double> direct = dense_lu_solve(sys);
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    CHECK(it.field.values[i] ==
          doctest::Approx(direct[i]).epsilon(1e-11).scale(1.0));
  }
}

TEST_CASE("zero load gives the zero field") {
  const Mesh mesh = build_mesh(NozzleMap::straight(), 1.0, 4, 4);
  LinearSystem sys = assemble_weighted_stiffness(mesh, {});
  const SolveResult sol = solve_spd(sys, mesh, 1e-12);
  CHECK(sol.iterations == 0);
  for (double v : sol.field.values) CHECK(v == 0.0);
}

TEST_CASE("scaling the system leaves the solution unchanged") {
  const Mesh mesh = build_mesh(NozzleMap::sinusoidal(0.1, 2.0), 1.0, 4, 4);
  LinearSystem sys = assemble_weighted_stiffness(mesh, {});
  sys.rhs = outlet_flux_load(mesh, 1.0);
  const SolveResult a = solve_spd(sys, mesh, 1e-13);

  const double c = 5.5;
  std::vector<double> w(mesh.n_quad(), c);
  LinearSystem scaled = assemble_weighted_stiffness(mesh, w);
  scaled.rhs = outlet_flux_load(mesh, c * 1.0);
  const SolveResult b = solve_spd(scaled, mesh, 1e-13);
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    CHECK(a.field.values[i] ==
          doctest::Approx(b.field.values[i]).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("gradients of linear fields are exact") {
  const Mesh mesh = build_mesh(NozzleMap::sinusoidal(0.2, 4.0), 2.0, 8, 6);
  const ScalarField f = linear_field(mesh, 0.3, -1.2, 0.7);
  for (const auto& g : gradients_at_quad(f)) {
    CHECK(g[0] == doctest::Approx(-1.2).epsilon(1e-12));
    CHECK(g[1] == doctest::Approx(0.7).epsilon(1e-12));
  }
}

TEST_CASE("functional J") {
  const Mesh mesh = build_mesh(NozzleMap::straight(), 1.0, 4, 4);

  SUBCASE("zero field") {
    CHECK(functional_J(make_field(mesh), 1.0) == 0.0);
  }

  SUBCASE("hand-integrated ramp") {
    // phi = (z + 1)/2 on the width-2 duct of length 2:
    // J = 1/2 * 1/4 * 4 - 1/2 * int_{S+} 1 = 0.5 - 1 = -0.5
    const ScalarField ramp = linear_field(mesh, 0.5, 0.0, 0.5);
    CHECK(functional_J(ramp, 1.0) == doctest::Approx(-0.5).epsilon(1e-13));
  }

  SUBCASE("solution minimizes J among perturbations") {
    LinearSystem sys = assemble_weighted_stiffness(mesh, {});
    sys.rhs = outlet_flux_load(mesh, 1.0);
    const SolveResult sol = solve_spd(sys, mesh, 1e-13);
    const double j_min = functional_J(sol.field, 1.0);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
      ScalarField candidate = sol.field;
      for (int i = 0; i < mesh.n_nodes(); ++i) {
        if (!candidate.dirichlet[i]) candidate.values[i] += 0.01 * unif(rng);
      }
      CHECK(functional_J(candidate, 1.0) > j_min);
    }
  }
}

TEST_CASE("functional I") {
  const Mesh mesh = build_mesh(NozzleMap::sinusoidal(0.1, 2.0), 1.0, 6, 4);
  const GasLaw gas = GasLaw::polytropic(2.0);
  const SubsonicCutoff cutoff = SubsonicCutoff::make(gas, 0.5, 0.2);
  const std::vector<double> phi_f(mesh.n_quad(), 0.0);
  const double eps = 0.1;

  const ScalarField ref = linear_field(mesh, 0.0, 0.05, 0.4);

  SUBCASE("vanishes at the reference") {
    CHECK(functional_I(ref, ref, cutoff, eps, phi_f) == 0.0);
  }

  SUBCASE("matches the gamma = 2 closed form on the identity branch") {
    // For p = rho^2 and phi_f = 0 the truncated density on the identity
    // branch is 1 - eps^2 lambda / 4, so
    //   int_{L0}^{L1} (rho - 1) = -eps^2 (L1^2 - L0^2) / 8
    // and the integrand of I has an exact expression.
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> unif(-0.5, 0.5);
    ScalarField field = ref;
    for (int i = 0; i < mesh.n_nodes(); ++i) {
      field.values[i] += 0.02 * unif(rng) * (field.dirichlet[i] ? 0.0 : 1.0);
    }
    const auto g = gradients_at_quad(field);
    const auto gr = gradients_at_quad(ref);
    double expected = 0.0;
    for (int q = 0; q < mesh.n_quad(); ++q) {
      const double lam = g[q][0] * g[q][0] + g[q][1] * g[q][1];
      const double lam_ref = gr[q][0] * gr[q][0] + gr[q][1] * gr[q][1];
      const double dt = g[q][0] - gr[q][0];
      const double dz = g[q][1] - gr[q][1];
      const double point =
          0.5 * (dt * dt + dz * dz) -
          eps * eps * (lam * lam - lam_ref * lam_ref) / 16.0;
      expected += mesh.quad[q].weight * point;
    }
    expected /= eps * eps * eps * eps;
    CHECK(functional_I(field, ref, cutoff, eps, phi_f) ==
          doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("flux modes") {
  const Mesh mesh = build_mesh(NozzleMap::straight(), 1.0, 4, 4);

  SUBCASE("uniform field through a width-2 section") {
    const ScalarField ramp = linear_field(mesh, 0.0, 0.0, 0.5);
    const CrossSection cs = cross_section_facets(mesh, 0.0);
    const double fq = flux_quadrature_mode(
        ramp, [](double, Point2) { return 1.0; }, cs);
    CHECK(fq == doctest::Approx(1.0).epsilon(1e-13));
  }

  SUBCASE("residual mode is constant across sections for a solve") {
    LinearSystem sys = assemble_weighted_stiffness(mesh, {});
    sys.rhs = outlet_flux_load(mesh, 1.0);
    const SolveResult sol = solve_spd(sys, mesh, 1e-13);
    for (double a : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
      const double f = flux_residual_mode(sol.field, {},
                                          cross_section_facets(mesh, a));
      CHECK(f == doctest::Approx(1.0).epsilon(1e-11));
    }
  }
}

TEST_CASE("window average of the squared gradient") {
  const Mesh mesh = build_mesh(NozzleMap::straight(), 1.0, 4, 4);
  LinearSystem sys = assemble_weighted_stiffness(mesh, {});
  sys.rhs = outlet_flux_load(mesh, 1.0);
  const SolveResult sol = solve_spd(sys, mesh, 1e-13);
  CHECK(window_avg_gradsq(sol.field, Window{-0.5, 0.5}) ==
        doctest::Approx(0.25).epsilon(1e-10));
  CHECK(window_avg_gradsq(make_field(mesh), Window{-0.5, 0.5}) == 0.0);
  CHECK_THROWS_AS(window_avg_gradsq(sol.field, Window{0.9, 0.95}),
                  std::range_error);
}

TEST_CASE("Poincare ratio") {
  const Mesh mesh = build_mesh(NozzleMap::straight(), 1.0, 8, 4);

  SUBCASE("constant field flags and returns zero") {
    ScalarField constant = make_field(mesh);
    for (double& v : constant.values) v = 3.0;
    const PoincareResult res = poincare_check(constant, Window{-1.0, 0.0});
    CHECK(res.constant_field);
    CHECK(res.ratio == 0.0);
    CHECK(res.deviation_norm <= 1e-12);
  }

  SUBCASE("linear axial field on a unit window") {
    const ScalarField ramp = linear_field(mesh, 0.0, 0.0, 1.0);
    const PoincareResult res = poincare_check(ramp, Window{-0.5, 0.5});
    CHECK_FALSE(res.constant_field);
    CHECK(res.ratio ==
          doctest::Approx(1.0 / (2.0 * std::sqrt(3.0))).epsilon(1e-12));
  }
}

TEST_CASE("solver reports the iteration cap with its residual history") {
  // a checkerboard of extreme weight contrast stalls the iteration well
  // before the cap-many sweeps can reach the requested tolerance
  const Mesh mesh = build_mesh(NozzleMap::sinusoidal(0.2, 4.0), 2.0, 12, 6);
  std::vector<double> w(mesh.n_quad());
  for (int e = 0; e < mesh.n_elems(); ++e) {
    for (int q = 0; q < 4; ++q) w[4 * e + q] = (e % 2) ? 1e12 : 1e-12;
  }
  LinearSystem sys = assemble_weighted_stiffness(mesh, w);
  sys.rhs = outlet_flux_load(mesh, 1.0);
  CHECK_THROWS_WITH_AS(solve_spd(sys, mesh, 1e-30),
                       doctest::Contains("iteration cap"),
                       std::runtime_error);
}

TEST_CASE("quadrature-mode flux converges at second order to the "
          "conservative value") {
  auto discrepancy = [](int nx, int nt) {
    const Mesh mesh =
        build_mesh(NozzleMap::sinusoidal(0.2, 4.0), 4.0, nx, nt);
    LinearSystem sys = assemble_weighted_stiffness(mesh, {});
    sys.rhs = outlet_flux_load(mesh, 1.0);
    const SolveResult sol = solve_spd(sys, mesh, 1e-13);
    const CrossSection cs = cross_section_facets(mesh, 1.0);
    const double fq = flux_quadrature_mode(
        sol.field, [](double, Point2) { return 1.0; }, cs);
    return std::abs(fq - 1.0);
  };
  const double coarse = discrepancy(32, 8);
  const double fine = discrepancy(64, 16);
  CHECK(coarse / fine >= 2.5);  // roughly O(h^2)
  CHECK(fine < coarse);
}

TEST_CASE("Galerkin residual of a converged solve") {
  const Mesh mesh = build_mesh(NozzleMap::sinusoidal(0.2, 4.0), 2.0, 16, 8);
  LinearSystem sys = assemble_weighted_stiffness(mesh, {});
  sys.rhs = outlet_flux_load(mesh, 1.0);
  const SolveResult sol = solve_spd(sys, mesh, 1e-12);
  const std::vector<double> action =
      apply_weighted_stiffness(mesh, {}, sol.field.values);
  double bmax = 0.0;
  for (double v : sys.rhs) bmax = std::max(bmax, std::abs(v));
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    if (sys.constrained[i]) continue;
    CHECK(std::abs(action[i] - sys.rhs[i]) <= 1e-10 * bmax);
  }
}
