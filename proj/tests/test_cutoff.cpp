#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "machzero/cutoff.hpp"

using namespace machzero;

namespace {

SubsonicCutoff default_cutoff() {
  return SubsonicCutoff::make(GasLaw::polytropic(2.0), 0.5, 0.1);
}

}  // namespace

TEST_CASE("knot speed matches the bisection definition") {
  // For both laws the Mach-theta speed decreases in eps, so the infimum over
  // (0, eps0] sits at eps0 and must agree with speed_at_mach there.
  for (const GasLaw& gas : {GasLaw::polytropic(1.4), GasLaw::polytropic(2.0),
                            GasLaw::isothermal()}) {
    for (double theta : {0.3, 0.5, 0.8}) {
      for (double eps0 : {0.1, 0.3}) {
        std::vector<double> phis = {0.0, 0.4, 1.0};
        const SubsonicCutoff cutoff =
            SubsonicCutoff::make(gas, theta, eps0, phis);
        for (double phi : phis) {
          CHECK(cutoff.knot_speed(phi) ==
                doctest::Approx(speed_at_mach(gas, eps0, theta, phi))
                    .epsilon(1e-9));
        }
      }
    }
  }
}

TEST_CASE("qhat identity branch") {
  const SubsonicCutoff cutoff = default_cutoff();
  CHECK(cutoff.value(0.0, 0.0) == 0.0);
  const SubsonicCutoff with_force = SubsonicCutoff::make(
      GasLaw::polytropic(2.0), 0.5, 0.1, std::vector<double>{0.0, 0.3});
  const double q2 = 0.5 * with_force.knot_speed_sq(0.3);
  CHECK(with_force.value(q2, 0.3) ==
        doctest::Approx(q2 - 0.6).epsilon(1e-14));
  CHECK(with_force.dvalue_dq2(q2, 0.3) == 1.0);
  CHECK(with_force.dvalue_dphi(q2, 0.3) == -2.0);
}

TEST_CASE("qhat plateau branch") {
  const SubsonicCutoff cutoff = default_cutoff();
  const double upper = std::sqrt(cutoff.upper_ref_speed_sq(0.0));
  const double q = 2.0 * upper;
  CHECK(cutoff.value(q * q, 0.0) ==
        doctest::Approx(cutoff.plateau()).epsilon(1e-14));
  CHECK(cutoff.dvalue_dq2(q * q, 0.0) == 0.0);
  CHECK(cutoff.dvalue_dphi(q * q, 0.0) == 0.0);
  // with a uniform zero force the plateau equals the upper reference value
  CHECK(cutoff.plateau() ==
        doctest::Approx(cutoff.upper_ref_speed_sq(0.0)).epsilon(1e-14));
}

TEST_CASE("qhat is C1 monotone with bounded derivatives") {
  const std::vector<double> phis = {0.0, 0.25, 0.8};
  const SubsonicCutoff cutoff =
      SubsonicCutoff::make(GasLaw::polytropic(1.4), 0.6, 0.2, phis);
  for (double phi : phis) {
    const double lam0 = cutoff.knot_speed_sq(phi);
    const double lam_hi = cutoff.blend_end_speed_sq(phi);
    CHECK(lam_hi > lam0);

    // C1 at both knots: one-sided derivative mismatch below 1e-10
    for (double knot : {lam0, lam_hi}) {
      const double d = 1e-12 * std::max(1.0, knot);
      CHECK(std::abs(cutoff.dvalue_dq2(knot - d, phi) -
                     cutoff.dvalue_dq2(knot + d, phi)) < 1e-10);
    }

    // monotone, derivative ranges, finite-difference consistency
    double prev = cutoff.value(0.0, phi);
    const int n = 2000;
    const double hi = 1.5 * lam_hi;
    for (int k = 1; k <= n; ++k) {
      const double q2 = hi * k / n;
      const double v = cutoff.value(q2, phi);
      CHECK((v - prev) / (hi / n) >= -1e-12);
      prev = v;
      const double dq = cutoff.dvalue_dq2(q2, phi);
      CHECK(dq >= 0.0);
      CHECK(dq <= 1.0 + 1e-14);
      const double dphi = cutoff.dvalue_dphi(q2, phi);
      CHECK(dphi <= 1e-14);
      CHECK(dphi >= -2.0 - 1e-14);
      const double h = 1e-6 * hi;
      const double fd =
          (cutoff.value(q2 + h, phi) - cutoff.value(q2 - h, phi)) / (2.0 * h);
      CHECK(fd == doctest::Approx(dq).epsilon(1e-4).scale(1.0));
    }

    // dvalue_dphi against a finite difference in phi (interior of the blend)
    const double q2 = 0.5 * (lam0 + lam_hi);
    const double hp = 1e-6;
    const double fd = (cutoff.value(q2, phi + hp) -
                       cutoff.value(q2, phi > hp ? phi - hp : 0.0)) /
                      (phi > hp ? 2.0 * hp : hp);
    CHECK(fd == doctest::Approx(cutoff.dvalue_dphi(q2, phi))
                    .epsilon(1e-4)
                    .scale(1.0));
  }
}

TEST_CASE("truncated density matches the Bernoulli density on the identity "
          "branch") {
  const std::vector<double> phis = {0.0, 0.2, 0.6};
  const SubsonicCutoff cutoff =
      SubsonicCutoff::make(GasLaw::polytropic(2.0), 0.5, 0.2, phis);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const double phi = 0.6 * unif(rng);
    const double q2 = cutoff.knot_speed_sq(phi) * unif(rng);
    const double eps = 0.2 * (0.05 + 0.95 * unif(rng));
    const double a = cutoff.density(eps, q2, phi);
    const double b = density_from_speed(cutoff.gas_law(), eps, q2, phi);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
  }

  const SubsonicCutoff plain = default_cutoff();
  CHECK(plain.density(0.05, 0.0, 0.0) == 1.0);
  CHECK(plain.density(0.1, 1.0, 0.0) ==
        doctest::Approx(0.9975).epsilon(1e-14));
  // far beyond the plateau the density is a positive constant
  const double far = 4.0 * plain.blend_end_speed_sq(0.0);
  const double rho_far = plain.density(0.1, far, 0.0);
  CHECK(rho_far > 0.0);
  CHECK(plain.density(0.1, 2.0 * far, 0.0) == rho_far);
  CHECK_THROWS_AS(plain.density(0.2, 1.0, 0.0), std::domain_error);
}

TEST_CASE("density derivative follows the chain rule") {
  const SubsonicCutoff cutoff = SubsonicCutoff::make(
      GasLaw::polytropic(1.4), 0.5, 0.2, std::vector<double>{0.0, 0.5});
  for (double q2 : {0.1, 3.0, 8.0, 20.0}) {
    for (double phi : {0.0, 0.5}) {
      const double h = 1e-6 * std::max(1.0, q2);
      const double fd = (cutoff.density(0.1, q2 + h, phi) -
                         cutoff.density(0.1, q2 - h, phi)) /
                        (2.0 * h);
      CHECK(fd == doctest::Approx(cutoff.density_dq2(0.1, q2, phi))
                      .epsilon(1e-5)
                      .scale(1e-3));
      const double fdp = (cutoff.density(0.1, q2, phi + 1e-6) -
                          cutoff.density(0.1, q2, phi)) / 1e-6;
      CHECK(fdp == doctest::Approx(cutoff.density_dphi(0.1, q2, phi))
                       .epsilon(1e-4)
                       .scale(1e-3));
    }
  }
}

TEST_CASE("(rhohat - 1)/eps^2 stays bounded as eps decreases") {
  const SubsonicCutoff cutoff = SubsonicCutoff::make(
      GasLaw::polytropic(1.4), 0.5, 0.2, std::vector<double>{0.0, 0.5});
  double prev_max = -1.0;
  double overall_min = 1e300, overall_max = 0.0;
  for (double eps : {0.2, 0.1, 0.05, 0.025, 0.0125}) {
    double m = 0.0;
    for (int k = 0; k <= 100; ++k) {
      for (double phi : {0.0, 0.5}) {
        const double q2 = 1.2 * cutoff.blend_end_speed_sq(phi) * k / 100.0;
        const double r = cutoff.density(eps, q2, phi);
        m = std::max(m, std::abs(r - 1.0) / (eps * eps));
      }
    }
    CHECK(std::isfinite(m));
    overall_min = std::min(overall_min, m);
    overall_max = std::max(overall_max, m);
    prev_max = m;
  }
  CHECK(overall_max / overall_min <= 1.1);
}

TEST_CASE("hat coefficients") {
  const SubsonicCutoff cutoff = default_cutoff();

  SUBCASE("zero velocity gives an isotropic matrix") {
    const auto h = hat_coefficients(cutoff, 0.1, {0.0, 0.0}, 0.0, {0.0, 0.0});
    CHECK(h.a[0][0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(h.a[1][1] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(h.a[0][1] == 0.0);
    CHECK(h.b[0] == 0.0);
    CHECK(h.b[1] == 0.0);
  }

  SUBCASE("hand-evaluated below-cutoff state") {
    // rho = 0.9975, a_11 = rho (1 - eps^2 / p'(rho))
    const auto h = hat_coefficients(cutoff, 0.1, {1.0, 0.0}, 0.0, {0.0, 0.0});
    const double rho = 0.9975;
    CHECK(h.a[0][0] ==
          doctest::Approx(rho * (1.0 - 0.01 / (2.0 * rho))).epsilon(1e-12));
    CHECK(h.a[0][0] == doctest::Approx(0.99250).epsilon(1e-4));
    CHECK(h.a[1][1] == doctest::Approx(rho).epsilon(1e-12));
    CHECK(h.a[0][1] == 0.0);
  }

  SUBCASE("force gradient enters through b") {
    const SubsonicCutoff with_force = SubsonicCutoff::make(
        GasLaw::polytropic(2.0), 0.5, 0.1, std::vector<double>{0.0, 0.5});
    const auto h =
        hat_coefficients(with_force, 0.1, {0.3, 0.1}, 0.2, {0.7, 0.0});
    const double q2 = 0.1;
    const double rho = with_force.density(0.1, q2, 0.2);
    const double expected = 0.01 * rho * with_force.dvalue_dphi(q2, 0.2) *
                            0.7 / with_force.gas_law().dpressure(rho);
    CHECK(h.b[0] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(h.b[1] == 0.0);
  }
}

TEST_CASE("coefficient matrices stay well conditioned over admissible "
          "states") {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double worst_cond = 0.0;
  for (int trial = 0; trial < 2000; ++trial) {
    const double theta = 0.15 + 0.7 * unif(rng);
    const double eps0 = 0.05 + 0.25 * unif(rng);
    const double phi_star = unif(rng);
    std::vector<double> samples;
    for (int k = 0; k <= 8; ++k) samples.push_back(phi_star * k / 8.0);
    const SubsonicCutoff cutoff = SubsonicCutoff::make(
        GasLaw::polytropic(trial % 2 ? 1.4 : 2.0), theta, eps0, samples);
    const double eps = eps0 * (0.2 + 0.8 * unif(rng));
    const double phi = phi_star * unif(rng);
    const double speed =
        1.5 * std::sqrt(cutoff.blend_end_speed_sq(phi)) * unif(rng);
    const double ang = 6.283185307179586 * unif(rng);
    const HatCoefficients h = hat_coefficients(
        cutoff, eps, {speed * std::cos(ang), speed * std::sin(ang)}, phi,
        {0.0, 0.0});
    const double tr = h.a[0][0] + h.a[1][1];
    const double disc =
        std::sqrt((h.a[0][0] - h.a[1][1]) * (h.a[0][0] - h.a[1][1]) +
                  4.0 * h.a[0][1] * h.a[1][0]);
    const double lam_min = 0.5 * (tr - disc);
    const double lam_max = 0.5 * (tr + disc);
    REQUIRE(lam_min > 0.0);
    worst_cond = std::max(worst_cond, lam_max / lam_min);
  }
  CHECK(worst_cond <= 50.0);
}

TEST_CASE("construction guards") {
  CHECK_THROWS_AS(SubsonicCutoff::make(GasLaw::polytropic(2.0), 0.0, 0.1),
                  std::domain_error);
  CHECK_THROWS_AS(SubsonicCutoff::make(GasLaw::polytropic(2.0), 0.5, 1.0),
                  std::domain_error);
  const double bad = -0.1;
  CHECK_THROWS_AS(SubsonicCutoff::make(GasLaw::polytropic(2.0), 0.5, 0.1,
                                       std::span<const double>(&bad, 1)),
                  std::domain_error);
}
