#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "csl/catalog.hpp"
#include "csl/parallel.hpp"
#include "csl/quadrature.hpp"

namespace {

constexpr double kPi = std::numbers::pi;

std::array<csl::FieldExpr, 3> ambient_field(const std::string& x, const std::string& y, const std::string& z) {
  const auto& v = csl::ambient_variables();
  return {csl::parse_field(x, v), csl::parse_field(y, v), csl::parse_field(z, v)};
}

csl::FieldExpr chart_scalar(const std::string& t) { return csl::parse_field(t, csl::surface_variables()); }

}  // namespace

TEST(GaussLegendre, ExactForPolynomials) {
  std::vector<double> x, w;
  for (int n : {1, 2, 5, 16, 33}) {
    csl::gauss_legendre(n, 0.0, kPi, x, w);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += w[i] * std::pow(x[i], k);
      EXPECT_NEAR(s, std::pow(kPi, k + 1) / (k + 1), 1e-12 * std::pow(kPi, k + 1)) << n << " " << k;
    }
    for (int i = 1; i < n; ++i) EXPECT_LT(x[i - 1], x[i]);
    EXPECT_GT(x.front(), 0.0);
  }
}

TEST(Quadrature, GridShapes) {
  const auto t = csl::make_grid(csl::make_torus(2, 0.5), 8, 6);
  EXPECT_EQ(t.size(), 48u);
  EXPECT_EQ(t.rule, csl::QuadratureRule::trapezoid_periodic);
  const auto s = csl::make_grid(csl::make_sphere(1), 8, 6);
  EXPECT_EQ(s.rule, csl::QuadratureRule::gauss_legendre_latitude);
  for (const auto& w : s.weights) EXPECT_GT(w, 0.0);
  double total = 0.0;
  for (const auto& w : s.weights) total += w;
  EXPECT_NEAR(total, 2 * kPi * kPi, 1e-12);
}

TEST(Quadrature, AreaAndWillmoreOfRoundSphere) {
  const auto r = csl::integrate_all(csl::make_sphere(1), csl::flat_factor(),
                                    {csl::integrands::area(), csl::integrands::willmore()}, 64, 64);
  EXPECT_NEAR(r[0].value, 4 * kPi, 1e-10);
  EXPECT_NEAR(r[1].value, 4 * kPi, 1e-10);
  EXPECT_LT(r[0].error, 1e-10);
  EXPECT_EQ(r[0].nu, 64);
  EXPECT_NEAR(r[1].integrand_min, 1.0, 1e-12);
}

TEST(Quadrature, CliffordTorusWillmoreEnergy) {
  const auto r = csl::integrate(csl::make_clifford_torus(), csl::flat_factor(), csl::integrands::willmore(), 64, 64);
  EXPECT_NEAR(r.value, 2 * kPi * kPi, 1e-10);
}

TEST(Quadrature, ResolutionRobustness) {
  const auto s = csl::make_perturbed_sphere(1, 0.05, 2, 3);
  const auto f = csl::linear_harmonic_factor(0.3);
  const auto a = csl::integrate(s, f, csl::integrands::area(), 48, 48);
  const auto b = csl::integrate(s, f, csl::integrands::area(), 96, 96);
  EXPECT_LE(std::abs(a.value - b.value), std::max(a.error, 1e-13));
  EXPECT_LT(std::abs(a.value - b.value) / b.value, 1e-8);
}

TEST(Quadrature, SpectralConvergenceOnTorus) {
  const auto s = csl::make_torus(2, 0.5);
  const auto f = csl::linear_harmonic_factor(0.2);
  double prev = 1.0;
  for (int n : {8, 16, 32}) {
    const double err = std::abs(csl::gauss_bonnet_check(s, f, n, n).integral.value);
    EXPECT_LT(err, prev * 1e-2 + 1e-13) << n;
    prev = err;
  }
}

TEST(Quadrature, DeterministicAcrossThreadCounts) {
  const auto s = csl::make_ellipsoid(1, 1.1, 1.3);
  const auto f = csl::point_source_factor();
  csl::set_thread_count(1);
  const auto a = csl::integrate(s, f, csl::integrands::willmore(), 32, 32);
  const auto a2 = csl::integrate(s, f, csl::integrands::willmore(), 32, 32);
  csl::set_thread_count(3);
  const auto b = csl::integrate(s, f, csl::integrands::willmore(), 32, 32);
  csl::set_thread_count(0);
  EXPECT_EQ(a.value, a2.value);
  EXPECT_EQ(a.value, b.value);
}

TEST(GaussBonnet, ConformallyInvariant) {
  const auto sphere = csl::gauss_bonnet_check(csl::make_sphere(1), csl::flat_factor(), 64, 64);
  EXPECT_NEAR(sphere.integral.value, 4 * kPi, 1e-10);
  EXPECT_NEAR(sphere.chi, 2.0, 1e-10);
  const auto torus = csl::gauss_bonnet_check(csl::make_torus(2, 0.5), csl::linear_harmonic_factor(0.2), 64, 64);
  EXPECT_NEAR(torus.integral.value, 0.0, 1e-7);
  EXPECT_NEAR(torus.chi, 0.0, 1e-7);
  const auto ell = csl::gauss_bonnet_check(csl::make_ellipsoid(1, 1, 1.3), csl::point_source_factor(), 64, 64);
  EXPECT_NEAR(ell.integral.value, 4 * kPi, 1e-6);
}

TEST(Identities, MinkowskiTypeIdentity) {
  const auto torus = csl::make_torus(2, 0.5);
  const auto zero = csl::prop_am110_identity(torus, csl::azimuthal_factor(0.4), ambient_field("0", "0", "0"), 16, 16);
  EXPECT_EQ(zero.residual, 0.0);
  const auto rot = ambient_field("-y", "x", "0");
  const auto flat = csl::prop_am110_identity(torus, csl::flat_factor(), ambient_field("x*z", "y^2-z", "sin(x)"), 64, 64);
  EXPECT_LT(flat.residual, 1e-7);
  const auto az = csl::prop_am110_identity(torus, csl::azimuthal_factor(0.4), rot, 64, 64);
  EXPECT_LT(az.max_tangency, 1e-10);
  EXPECT_LT(az.residual, 1e-6);
  // Off tangency only the Ricci form survives.
  const auto lin = csl::prop_am110_identity(torus, csl::linear_harmonic_factor(0.2), ambient_field("x*z", "y^2-z", "sin(x)"),
                                            64, 64);
  EXPECT_LT(lin.general_residual, 1e-6);
  EXPECT_GT(lin.max_tangency, 0.1);
}

TEST(Identities, HessianSymmetry) {
  const auto torus = csl::make_torus(2, 0.5);
  const auto az = csl::azimuthal_factor(0.4);
  const auto same = csl::prop_am123_identity(torus, az, chart_scalar("sin(u)*x"), chart_scalar("sin(u)*x"), 16, 16);
  EXPECT_EQ(same.residual, 0.0);
  const auto r = csl::prop_am123_identity(torus, az, chart_scalar("sin(u)"), chart_scalar("cos(v)"), 64, 64);
  EXPECT_LT(r.residual, 1e-6);
  const auto flat = csl::prop_am123_identity(torus, csl::flat_factor(), chart_scalar("1+x*y"), chart_scalar("cos(v)*z"),
                                             64, 64);
  EXPECT_LT(flat.residual, 1e-7);
}

// With f constant the symmetry reduces to the Minkowski identity for X = grad g.
TEST(Identities, ConstantWeightMatchesGradientField) {
  const auto torus = csl::make_torus(2, 0.5);
  const auto az = csl::azimuthal_factor(0.4);
  const auto g = chart_scalar("cos(v)+0.3*sin(2*u)");
  const auto one = chart_scalar("1");
  const std::vector<csl::Integrand> parts{
      {"pair", [&](const csl::SurfacePointGeometry& p) {
         return csl::hessian_pair_integrand(p, csl::ChartJet(2, 1.0), csl::chart_scalar(g, p.chart_point, p.jets.x, 3));
       }},
      {"field", [&](const csl::SurfacePointGeometry& p) {
         const auto gj = csl::chart_scalar(g, p.chart_point, p.jets.x, 3);
         const auto& J = p.jets;
         const auto g0 = gj.partial(0), g1 = gj.partial(1);
         const std::array<csl::ChartJet, 2> grad{J.ginv[0][0] * g0 + J.ginv[0][1] * g1, J.ginv[1][0] * g0 + J.ginv[1][1] * g1};
         return csl::minkowski_integrand(p, grad);
       }}};
  const auto r = csl::integrate_all(torus, az, parts, 64, 64, 3);
  EXPECT_NEAR(r[0].value, r[1].value, 1e-7);
  EXPECT_NEAR(r[1].value, 0.0, 1e-7);
  (void)one;
}

TEST(TheoremQuantities, ChiEstimateAndMinimalityIntegral) {
  const auto sphere = csl::make_sphere(1.5);
  EXPECT_EQ(csl::euler_characteristic_estimate(sphere, csl::flat_factor(), 16, 16).value, 0.0);
  EXPECT_EQ(csl::minimality_integral(sphere, csl::flat_factor(), 16, 16).value, 0.0);
  const auto f = csl::point_source_factor();
  const auto chi = csl::euler_characteristic_estimate(sphere, f, 64, 64);
  EXPECT_GT(chi.value, 0.0);
  // A factor radial about the center keeps H constant, so the integral factorizes.
  const auto radial = csl::factor_from_sigma("0.2*(x^2+y^2+z^2)");
  const auto m = csl::minimality_integral(sphere, radial, 64, 64);
  const auto w = csl::integrate(sphere, radial, csl::integrands::omega_sharp_norm2(), 64, 64);
  const double h = csl::surface_at(sphere, radial, {0.3, 0.4}, 2).mean_curvature;
  EXPECT_NEAR(m.value, h * w.value, 1e-8 * std::abs(m.value));
  EXPECT_NEAR(m.integrand_max, m.integrand_min, 1e-12);
  const auto torus = csl::euler_characteristic_estimate(csl::make_torus(2, 0.5), csl::azimuthal_factor(0.4), 64, 64);
  EXPECT_GT(torus.value, 0.0);
}
