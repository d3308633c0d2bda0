#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "csl/ambient.hpp"
#include "support.hpp"

using csl::AmbientPointGeometry;
using csl::ConformalFactor;
using csl::Vec3;

namespace {

ConformalFactor linear_harmonic() {
  return csl::harmonic_factor_from_potential(csl::parse_field("1+0.3*x", csl::ambient_variables()));
}
ConformalFactor point_source() {
  return csl::harmonic_factor_from_potential(
      csl::parse_field("1+1/sqrt((x-3)^2+y^2+z^2)", csl::ambient_variables()));
}

std::vector<ConformalFactor> fuzz_factors() {
  return {linear_harmonic(),
          point_source(),
          csl::factor_from_sigma("0.4*x/sqrt(x^2+y^2)"),
          csl::factor_from_sigma("x^2"),
          csl::factor_from_sigma("0.3*sin(x)*cos(2*y)+0.2*z^3-0.1*x*y*z"),
          csl::harmonic_factor_from_potential(csl::parse_field("2+0.2*x*y-0.1*z", csl::ambient_variables()))};
}

Vec3 random_point(std::mt19937& rng) {
  std::uniform_real_distribution<double> d(-1.5, 1.5);
  Vec3 p{d(rng), d(rng), d(rng)};
  if (std::hypot(p[0], p[1]) < 0.2) p[0] += 0.5;  // azimuthal factor axis
  return p;
}

double sigma_plain(const ConformalFactor& f, Vec3 p) { return f.sigma.eval(p); }

// Christoffel symbol from finite differences of the metric e^sigma delta.
double fd_christoffel(const ConformalFactor& f, const Vec3& p, int k, int i, int j) {
  auto dg = [&](int l, int a, int b) {
    if (a != b) return 0.0;
    auto line = [&](double s) {
      Vec3 q = p;
      q[l] += s;
      return std::exp(sigma_plain(f, q));
    };
    return csl::testing::fd_first(line, 0.0, 1e-3);
  };
  const double ginv = std::exp(-sigma_plain(f, p));
  return 0.5 * ginv * (dg(i, k, j) + dg(j, k, i) - dg(k, i, j));
}

double lowered(const AmbientPointGeometry& a, const csl::Riemann& r, int i, int j, int k, int l) {
  return a.metric[l][l] * r[i][j][k][l];
}

}  // namespace

TEST(Ambient, FlatSpaceIsTrivial) {
  const auto a = csl::ambient_at(csl::flat_factor(), {0.3, -1.0, 2.0});
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(a.omega_sharp[i], 0.0);
    for (int j = 0; j < 3; ++j) {
      EXPECT_EQ(a.b_tensor[i][j], 0.0);
      EXPECT_EQ(a.ricci[i][j], 0.0);
      for (int k = 0; k < 3; ++k) {
        EXPECT_EQ(a.christoffels[k][i][j], 0.0);
        for (int l = 0; l < 3; ++l) EXPECT_EQ(a.riemann[i][j][k][l], 0.0);
      }
    }
  }
  EXPECT_EQ(a.harmonic_residual, 0.0);
  const auto t = csl::curvature_via_transform(csl::flat_factor(), {1, 2, 3});
  EXPECT_EQ(csl::max_difference(t, a.riemann).first, 0.0);
}

TEST(Ambient, LinearHarmonicAtOrigin) {
  const auto f = csl::factor_from_sigma("2*ln(1+0.3*x)");
  const Vec3 o{0, 0, 0};
  const auto a = csl::ambient_at(f, o);
  EXPECT_NEAR(a.omega[0], 0.6, 1e-15);
  EXPECT_EQ(a.omega[1], 0.0);
  EXPECT_NEAR(a.christoffels[0][0][0], 0.3, 1e-15);
  EXPECT_NEAR(a.christoffels[1][0][1], 0.3, 1e-15);
  EXPECT_NEAR(a.christoffels[0][1][1], -0.3, 1e-15);
  // Independent oracle: metric finite differences through the standard formula.
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) EXPECT_NEAR(a.christoffels[k][i][j], fd_christoffel(f, o, k, i, j), 1e-9);
  EXPECT_NEAR(a.b_tensor[0][0], -0.36, 1e-15);
  // FD of omega_1 = d sigma / dx.
  auto w1 = [&](double s) { return csl::ambient_at(f, {s, 0, 0}).omega[0]; };
  EXPECT_NEAR(csl::testing::fd_first(w1, 0.0, 1e-3) - 0.5 * 0.36, -0.36, 1e-9);
}

TEST(Ambient, ChristoffelsMatchMetricDifferences) {
  std::mt19937 rng(1);
  for (const auto& f : fuzz_factors()) {
    for (int n = 0; n < 5; ++n) {
      const Vec3 p = random_point(rng);
      const auto a = csl::ambient_at(f, p);
      for (int k = 0; k < 3; ++k)
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) {
            EXPECT_EQ(a.christoffels[k][i][j], a.christoffels[k][j][i]);
            EXPECT_NEAR(a.christoffels[k][i][j], fd_christoffel(f, p, k, i, j), 1e-7) << f.sigma.to_string();
          }
    }
  }
}

TEST(Ambient, CurvatureSymmetries) {
  std::mt19937 rng(2);
  for (const auto& f : fuzz_factors()) {
    for (int n = 0; n < 10; ++n) {
      const auto a = csl::ambient_at(f, random_point(rng));
      const auto& r = a.riemann;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          for (int k = 0; k < 3; ++k)
            for (int l = 0; l < 3; ++l) {
              EXPECT_NEAR(r[i][j][k][l], -r[j][i][k][l], 1e-10);
              // g(R(X,Y)Z,W) = g(R(Z,W)X,Y)
              EXPECT_NEAR(lowered(a, r, i, j, k, l), lowered(a, r, k, l, i, j), 1e-10);
            }
    }
  }
}

TEST(Ambient, TransformLawMatchesDirectCurvature) {
  std::mt19937 rng(3);
  for (const auto& f : fuzz_factors()) {
    for (int n = 0; n < 100; ++n) {
      const Vec3 p = random_point(rng);
      const auto direct = csl::curvature_direct(f, p);
      const auto via = csl::curvature_via_transform(f, p);
      const auto [diff, scale] = csl::max_difference(via, direct);
      EXPECT_LE(diff, 1e-9 * std::max(scale, 1.0)) << f.sigma.to_string();
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          Vec3 ei{}, ej{};
          ei[i] = 1;
          ej[j] = 1;
          if (i == j) continue;
          const auto a = csl::ambient_at(f, p);
          auto b = a;
          b.riemann = via;
          EXPECT_NEAR(a.sectional(ei, ej), b.sectional(ei, ej), 1e-9 * std::max(1.0, std::abs(a.sectional(ei, ej))));
        }
    }
  }
}

TEST(Ambient, PublishedQuarticSignDoesNotMatch) {
  const auto f = linear_harmonic();
  const Vec3 p{0.2, 0.1, -0.3};
  const auto [diff, scale] = csl::max_difference(csl::curvature_via_transform(f, p, csl::QuarticSign::as_printed),
                                                 csl::curvature_direct(f, p));
  EXPECT_GT(diff, 1e-3);
  (void)scale;
}

TEST(Ambient, MetricCompatibility) {
  std::mt19937 rng(4);
  for (const auto& f : fuzz_factors()) {
    const Vec3 p = random_point(rng);
    const auto a = csl::ambient_at(f, p);
    const double e = std::exp(a.sigma);
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          const double dg = i == j ? e * a.omega[k] : 0.0;
          double r = dg;
          for (int l = 0; l < 3; ++l) r -= a.christoffels[l][k][i] * a.metric[l][j] + a.christoffels[l][k][j] * a.metric[i][l];
          EXPECT_NEAR(r, 0.0, 1e-10 * std::max(1.0, e));
        }
  }
}

TEST(Ambient, BIsSymmetricAndSharpIsDual) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> d(-1, 1);
  for (const auto& f : fuzz_factors()) {
    const auto a = csl::ambient_at(f, random_point(rng));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) EXPECT_NEAR(a.b_tensor[i][j], a.b_tensor[j][i], 1e-10);
    const Vec3 v{d(rng), d(rng), d(rng)};
    EXPECT_NEAR(a.g(a.omega_sharp, v), a.omega_of(v), 1e-12);
    EXPECT_GE(a.omega_sharp_norm2(), 0.0);
    EXPECT_NEAR(a.omega_sharp_norm2(), a.g(a.omega_sharp, a.omega_sharp), 1e-12);
  }
}

TEST(Ambient, RicciIsSymmetricTrace) {
  std::mt19937 rng(6);
  for (const auto& f : fuzz_factors()) {
    const auto a = csl::ambient_at(f, random_point(rng));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) EXPECT_NEAR(a.ricci[i][j], a.ricci[j][i], 1e-10);
  }
}

TEST(Harmonicity, Residuals) {
  EXPECT_EQ(csl::harmonicity_residual(csl::flat_factor(), {1, 2, 3}), 0.0);
  EXPECT_NEAR(csl::harmonicity_residual(csl::factor_from_sigma("x^2"), {0, 0, 0}), 2.0, 1e-15);
  const auto lin = csl::factor_from_sigma("2*ln(1+0.3*x)");
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  for (int n = 0; n < 200; ++n) {
    const Vec3 p{d(rng), d(rng), d(rng)};
    EXPECT_LT(std::abs(csl::harmonicity_residual(lin, p)), 1e-10);
  }
}

TEST(Harmonicity, PotentialGenerator) {
  const auto one = csl::harmonic_factor_from_potential(csl::FieldExpr::constant(1.0, csl::ambient_variables()));
  EXPECT_TRUE(one.is_flat());
  EXPECT_TRUE(one.harmonic_intent);
  std::mt19937 rng(8);
  for (int n = 0; n < 200; ++n) {
    const Vec3 p = random_point(rng);
    EXPECT_LT(std::abs(csl::harmonicity_residual(linear_harmonic(), p)), 1e-10);
    EXPECT_LT(std::abs(csl::harmonicity_residual(point_source(), p)), 1e-9);
  }
  // A non-harmonic potential leaves a residual.
  const auto bad = csl::harmonic_factor_from_potential(csl::parse_field("1+x^2", csl::ambient_variables()));
  EXPECT_GT(std::abs(csl::harmonicity_residual(bad, {0, 0, 0})), 1.0);
}
