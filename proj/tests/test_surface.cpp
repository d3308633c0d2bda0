#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "csl/catalog.hpp"
#include "csl/surface.hpp"
#include "support.hpp"

using csl::Vec2;
using csl::Vec3;
using csl::operator-;
using csl::operator*;

namespace {

constexpr double kPi = std::numbers::pi;

Vec2 random_chart_point(const csl::ClosedSurface& s, std::mt19937& rng) {
  const auto& d = s.domain();
  std::uniform_real_distribution<double> uu(d.u[0], d.u[1]);
  // Stay away from the poles of latitude charts.
  const double pad = s.topology() == csl::Topology::sphere_like ? 0.05 : 0.0;
  std::uniform_real_distribution<double> vv(d.v[0] + pad, d.v[1] - pad);
  return {uu(rng), vv(rng)};
}

Vec2 random_vec(std::mt19937& rng) {
  std::uniform_real_distribution<double> d(-1, 1);
  return {d(rng), d(rng)};
}

}  // namespace

TEST(Surface, RoundSphereInward) {
  const auto s = csl::make_sphere(2.0, {0.5, -1, 0});
  EXPECT_EQ(s.chart_sign(), 1);  // the chart normal already points inward
  EXPECT_NEAR(s.scale(), 4.0, 0.05);
  const auto p = csl::surface_at(s, csl::flat_factor(), {0.7, 1.1}, 4);
  EXPECT_NEAR(p.principal_curvatures[0], 0.5, 1e-13);
  EXPECT_NEAR(p.principal_curvatures[1], 0.5, 1e-13);
  EXPECT_NEAR(p.mean_curvature, 0.5, 1e-13);
  EXPECT_NEAR(p.gauss_intrinsic, 0.25, 1e-12);
  EXPECT_EQ(p.ambient_sectional, 0.0);
  EXPECT_TRUE(p.umbilic);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(p.shape_operator[i][j], i == j ? 0.5 : 0.0, 1e-13);
  // N points to the center.
  const Vec3 to_center = Vec3{0.5, -1, 0} - p.position;
  EXPECT_NEAR(csl::dot(p.normal, to_center), 2.0, 1e-12);
  EXPECT_NEAR(csl::surface_laplacian(p, p.jets.H), 0.0, 1e-12);
}

TEST(Surface, TextbookTorus) {
  const double R = 2.0, r = 0.5;
  const auto s = csl::make_torus(R, r);
  std::mt19937 rng(1);
  for (int n = 0; n < 20; ++n) {
    const Vec2 uv = random_chart_point(s, rng);
    const auto p = csl::surface_at(s, csl::flat_factor(), uv, 3);
    const double cv = std::cos(uv[1]);
    EXPECT_NEAR(p.principal_curvatures[0], 1.0 / r, 1e-12);
    EXPECT_NEAR(p.principal_curvatures[1], cv / (R + r * cv), 1e-12);
    EXPECT_NEAR(p.gauss_intrinsic, cv / (r * (R + r * cv)), 1e-11);
  }
}

TEST(Surface, NormalAndShapeOperatorInvariants) {
  const std::vector<csl::ClosedSurface> surfaces{csl::make_ellipsoid(1, 1, 1.3), csl::make_torus(2, 0.5),
                                                 csl::make_perturbed_sphere(1, 0.05, 2, 3)};
  const std::vector<csl::ConformalFactor> factors{csl::flat_factor(), csl::linear_harmonic_factor(0.3),
                                                  csl::point_source_factor()};
  std::mt19937 rng(2);
  for (const auto& s : surfaces)
    for (const auto& f : factors)
      for (int n = 0; n < 10; ++n) {
        const auto p = csl::surface_at(s, f, random_chart_point(s, rng), 3);
        EXPECT_NEAR(p.ambient.g(p.normal, p.normal), 1.0, 1e-12);
        EXPECT_NEAR(p.ambient.g(p.normal, p.tangent_basis[0]), 0.0, 1e-12);
        EXPECT_NEAR(p.ambient.g(p.normal, p.tangent_basis[1]), 0.0, 1e-12);
        const Vec2 x = random_vec(rng), y = random_vec(rng);
        EXPECT_NEAR(p.g(p.apply_a(x), y), p.g(x, p.apply_a(y)), 1e-10);
        for (int i = 0; i < 2; ++i) {
          const Vec2 e = p.principal_chart[i];
          const Vec2 ae = p.apply_a(e);
          const Vec2 res{ae[0] - p.principal_curvatures[i] * e[0], ae[1] - p.principal_curvatures[i] * e[1]};
          EXPECT_LT(std::sqrt(p.g(res, res)), 1e-9);
          EXPECT_NEAR(p.g(e, e), 1.0, 1e-12);
        }
        EXPECT_NEAR(p.g(p.principal_chart[0], p.principal_chart[1]), 0.0, 1e-12);
        EXPECT_GE(p.principal_curvatures[0], p.principal_curvatures[1]);
        EXPECT_LT(std::abs(p.gauss_residual()), 1e-8) << s.name() << " " << f.name;
      }
}

TEST(Surface, GaussEquationOnEllipsoid) {
  const auto s = csl::make_ellipsoid(1, 1, 1.3);
  const auto f = csl::factor_from_sigma("2*ln(1+0.1*x)");
  std::mt19937 rng(3);
  for (int n = 0; n < 200; ++n) {
    const auto p = csl::surface_at(s, f, random_chart_point(s, rng), 3);
    EXPECT_LT(std::abs(p.gauss_residual()), 1e-8);
  }
}

TEST(Surface, ConformalFactorChangesShapeOperator) {
  const auto s = csl::make_sphere(1.0);
  const auto p0 = csl::surface_at(s, csl::flat_factor(), {0.3, 1.0}, 2);
  const auto p1 = csl::surface_at(s, csl::factor_from_sigma("2*ln(1+0.3*x)"), {0.3, 1.0}, 2);
  EXPECT_GT(std::abs(p1.shape_operator[0][0] - p0.shape_operator[0][0]), 1e-3);
  // Eigenvalues stay real: the g-orthonormal representation is symmetric.
  const auto& G = p1.induced_metric;
  const double a = std::sqrt(G[0][0]);
  const double b = G[0][1] / a, c = std::sqrt(G[1][1] - b * b);
  // L = [[a, 0], [b, c]]^T so G = L^T L; S = L A L^-1.
  const csl::Mat2 L{{{a, b}, {0, c}}};
  const auto S = L * p1.shape_operator * csl::inverse(L);
  EXPECT_NEAR(S[0][1], S[1][0], 1e-12);
}

TEST(Surface, OrientationFlip) {
  const auto f = csl::linear_harmonic_factor(0.3);
  const auto in = csl::make_torus(2, 0.5, csl::Orientation::inward);
  const auto out = csl::make_torus(2, 0.5, csl::Orientation::outward);
  EXPECT_EQ(in.chart_sign(), -out.chart_sign());
  const Vec2 uv{0.4, 2.2};
  const auto a = csl::surface_at(in, f, uv, 3), b = csl::surface_at(out, f, uv, 3);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(a.shape_operator[i][j], -b.shape_operator[i][j], 1e-13);
  EXPECT_NEAR(a.principal_curvatures[0], -b.principal_curvatures[1], 1e-13);
  EXPECT_NEAR(a.principal_curvatures[1], -b.principal_curvatures[0], 1e-13);
  EXPECT_NEAR(a.mean_curvature, -b.mean_curvature, 1e-13);
  EXPECT_NEAR(a.gauss_intrinsic, b.gauss_intrinsic, 1e-13);
  EXPECT_NEAR(a.ambient_sectional, b.ambient_sectional, 1e-13);
}

TEST(SurfaceOperators, Laplacian) {
  const auto s = csl::make_sphere(1.0);
  std::mt19937 rng(4);
  for (int n = 0; n < 20; ++n) {
    const Vec2 uv = random_chart_point(s, rng);
    const auto p = csl::surface_at(s, csl::flat_factor(), uv, 3);
    const auto cv = cos(csl::ChartJet::variable(1, uv[1], 3));
    EXPECT_NEAR(csl::surface_laplacian(p, cv) + 2 * std::cos(uv[1]), 0.0, 1e-8);
    EXPECT_EQ(csl::surface_laplacian(p, csl::ChartJet(3, 4.0)), 0.0);
  }
  EXPECT_THROW(csl::surface_laplacian(csl::surface_at(s, csl::flat_factor(), {1, 1}, 3), csl::ChartJet(1, 0.0)),
               csl::OrderError);
}

TEST(SurfaceOperators, CodazziFlatAndAzimuthal) {
  std::mt19937 rng(5);
  const auto torus = csl::make_torus(2, 0.5);
  const auto ell = csl::make_ellipsoid(1, 1.2, 0.8);
  for (int n = 0; n < 50; ++n) {
    for (const auto* s : {&torus, &ell}) {
      const auto p = csl::surface_at(*s, csl::flat_factor(), random_chart_point(*s, rng), 3);
      EXPECT_LT(csl::codazzi_residual(p, random_vec(rng), random_vec(rng), random_vec(rng)), 1e-9);
    }
    const auto p = csl::surface_at(torus, csl::azimuthal_factor(0.4), random_chart_point(torus, rng), 3);
    const Vec2 x = random_vec(rng), y = random_vec(rng), z = random_vec(rng);
    EXPECT_LT(p.tangency_residual, 1e-10);
    EXPECT_LT(csl::codazzi_residual(p, x, y, z), 1e-8);
    EXPECT_LT(csl::codazzi_residual(p, {2 * x[0], 2 * x[1]}, y, z), 1e-8);
    EXPECT_LT(csl::codazzi_general_residual(p, x, y, z), 1e-8);
  }
}

TEST(SurfaceOperators, GeneralCodazziWithoutTangency) {
  std::mt19937 rng(6);
  const auto torus = csl::make_torus(2, 0.5);
  const auto f = csl::linear_harmonic_factor(0.2);
  double worst_tangent_form = 0.0;
  for (int n = 0; n < 50; ++n) {
    const auto p = csl::surface_at(torus, f, random_chart_point(torus, rng), 3);
    const Vec2 x = random_vec(rng), y = random_vec(rng), z = random_vec(rng);
    EXPECT_LT(csl::codazzi_general_residual(p, x, y, z), 1e-9);
    worst_tangent_form = std::max(worst_tangent_form, csl::codazzi_residual(p, x, y, z));
  }
  EXPECT_GT(worst_tangent_form, 1e-4);  // the tangent form needs omega(N) = 0
}

TEST(SurfaceOperators, DivergenceOfTangentialOmegaSharp) {
  const auto torus = csl::make_torus(2, 0.5);
  const auto f = csl::azimuthal_factor(0.4);
  std::mt19937 rng(7);
  auto field = [&](const Vec2& uv) {
    // Chart components g^ij d_j s, as jets.
    const auto p = csl::surface_at(torus, f, uv, 4);
    const auto& J = p.jets;
    const auto s0 = J.s.partial(0), s1 = J.s.partial(1);
    return std::pair{p, std::array<csl::ChartJet, 2>{J.ginv[0][0] * s0 + J.ginv[0][1] * s1,
                                                     J.ginv[1][0] * s0 + J.ginv[1][1] * s1}};
  };
  for (int n = 0; n < 20; ++n) {
    const Vec2 uv = random_chart_point(torus, rng);
    const auto [p, w] = field(uv);
    const double div = csl::surface_divergence(p, w);
    EXPECT_NEAR(div, p.frame_divergence_omega_sharp(), 1e-9);
    // FD of sqrt(g) V^i along each chart axis.
    double fd = 0.0;
    for (int i = 0; i < 2; ++i) {
      auto flux = [&](double t) {
        Vec2 q = uv;
        q[i] += t;
        const auto [pq, wq] = field(q);
        return pq.area_density * wq[i].value();
      };
      fd += csl::testing::fd_first(flux, 0.0, 1e-3);
    }
    EXPECT_NEAR(div, fd / p.area_density, 1e-7);
  }
}

TEST(SurfaceErrors, DegenerateChart) {
  const auto s = csl::make_custom(csl::Topology::torus_like, "cos(u)", "sin(u)", "0*v", std::nullopt,
                                  csl::Orientation::chart);
  EXPECT_THROW(csl::surface_at(s, csl::flat_factor(), {0.1, 0.2}, 2), csl::RegularityError);
  EXPECT_THROW(csl::surface_at(csl::make_sphere(1), csl::flat_factor(), {0.1, 0.2}, 1), csl::OrderError);
}
