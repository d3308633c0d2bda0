#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "csl/catalog.hpp"
#include "csl/variation.hpp"

namespace {

constexpr double kPi = std::numbers::pi;
using csl::operator-;

csl::ConformalFactor linear_harmonic() { return csl::linear_harmonic_factor(0.2); }

// Smooth speed on a periodic chart; ambient terms break the torus symmetries.
std::string random_torus_speed(std::mt19937& rng) {
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.6f+%.6f*cos(u)+%.6f*sin(v)+%.6f*cos(u+2*v)+%.6f*x*z+%.6f*sin(2*u-v)", c(rng),
                c(rng), c(rng), c(rng), c(rng), c(rng));
  return buf;
}

// Ambient polynomial, single-valued at the poles of latitude charts.
std::string random_sphere_speed(std::mt19937& rng) {
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.6f+%.6f*x+%.6f*y*z+%.6f*z^2+%.6f*x*y^2", c(rng), c(rng), c(rng), c(rng), c(rng));
  return buf;
}

std::vector<csl::Vec2> random_nodes(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> a(0.0, 2 * kPi);
  std::vector<csl::Vec2> out;
  for (int i = 0; i < n; ++i) out.push_back({a(rng), a(rng)});
  return out;
}

}  // namespace

TEST(VarySurface, UnitSpeedOnSphereShrinksRadius) {
  const auto s = csl::make_sphere(1.5);
  const auto v = csl::make_variation("1");
  for (double t : {0.1, -0.2}) {
    const auto st = csl::vary_surface(s, csl::flat_factor(), v, t);
    for (const auto& uv : random_nodes(20, 3)) {
      const csl::Vec2 p{uv[0], 0.1 + uv[1] / 2.2};
      EXPECT_NEAR(csl::norm(st.position(p)), 1.5 - t, 1e-13);
    }
    const double area = csl::quadrature_total(st, csl::flat_factor(), csl::integrands::area(), 32, 32, 2);
    EXPECT_NEAR(area, 4 * kPi * (1.5 - t) * (1.5 - t), 1e-9);
  }
}

TEST(VarySurface, ZeroStepReproducesGeometry) {
  const auto s = csl::make_torus(2, 0.5);
  const auto f = linear_harmonic();
  const auto st = csl::vary_surface(s, f, csl::make_variation("sin(u)*cos(v)"), 0.0);
  for (const auto& uv : random_nodes(10, 4)) {
    const auto a = csl::surface_at(s, f, uv, 3), b = csl::surface_at(st, f, uv, 3);
    EXPECT_NEAR(a.mean_curvature, b.mean_curvature, 1e-14);
    EXPECT_NEAR(a.gauss_intrinsic, b.gauss_intrinsic, 1e-14);
    EXPECT_NEAR(a.area_density, b.area_density, 1e-14);
  }
}

TEST(VarySurface, VariationalFieldIsSpeedTimesNormal) {
  const auto s = csl::make_torus(2, 0.5);
  const auto f = linear_harmonic();
  const auto v = csl::make_variation("1+0.3*x*cos(v)");
  const double t = 0.05;  // X_t is affine in t, so the difference quotient is exact
  const auto sp = csl::vary_surface(s, f, v, t), sm = csl::vary_surface(s, f, v, -t);
  for (const auto& uv : random_nodes(10, 5)) {
    const auto g = csl::surface_at(s, f, uv, 2);
    const double speed = 1 + 0.3 * g.position[0] * std::cos(uv[1]);
    const csl::Vec3 d = csl::scaled(sp.position(uv) - sm.position(uv), 1.0 / (2 * t));
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(d[k], speed * g.normal[k], 1e-12);
  }
}

TEST(VarySurface, LosesOneJetOrder) {
  const auto s = csl::make_sphere(1);
  const auto st = csl::vary_surface(s, csl::flat_factor(), csl::make_variation("1"), 0.1);
  EXPECT_EQ(st.source().max_order(), s.source().max_order() - 1);
  EXPECT_EQ(st.chart_sign(), s.chart_sign());
}

TEST(FdDelta, SphereAreaUnderUnitSpeed) {
  const double r = 1.3;
  const auto s = csl::make_sphere(r);
  const auto fd = csl::fd_delta(csl::functional_quantity("area", 24, 24), s, csl::flat_factor(), csl::make_variation("1"));
  EXPECT_NEAR(fd.value, -8 * kPi * r, 1e-9);
  EXPECT_TRUE(fd.converged);
  EXPECT_DOUBLE_EQ(fd.steps[1], fd.steps[0] / 2);
}

TEST(FdDelta, GaussBonnetIsInvariant) {
  std::mt19937 rng(11);
  const auto torus = csl::make_torus(2, 0.5);
  const auto sphere = csl::make_ellipsoid(1, 1.2, 0.9);
  for (const auto& f : {csl::flat_factor(), linear_harmonic()}) {
    const auto ft = csl::fd_delta(csl::functional_quantity("gauss_bonnet", 64, 64), torus, f,
                                  csl::make_variation(random_torus_speed(rng)));
    EXPECT_NEAR(ft.value, 0.0, 1e-6) << f.name;
    const auto fs = csl::fd_delta(csl::functional_quantity("gauss_bonnet", 48, 48), sphere, f,
                                  csl::make_variation(random_sphere_speed(rng)));
    EXPECT_NEAR(fs.value, 0.0, 1e-6) << f.name;
  }
}

TEST(FdDelta, UnknownQuantityIsRejected) {
  EXPECT_THROW(csl::point_quantity("volume", {0, 0}), csl::ConfigError);
  EXPECT_THROW(csl::functional_quantity("lambda1", 8, 8), csl::ConfigError);
  EXPECT_TRUE(csl::is_point_quantity("K"));
  EXPECT_FALSE(csl::is_point_quantity("willmore"));
}

TEST(FdDelta, LinearInSpeed) {
  const auto s = csl::make_torus(2, 0.5);
  const auto f = linear_harmonic();
  const csl::Vec2 uv{0.7, 2.1};
  const std::string a = "sin(u)*cos(v)", b = "0.4*x+cos(2*v)";
  const double step = 2e-3;
  for (const char* q : {"lambda1", "H", "K", "area_element"}) {
    const auto Q = csl::point_quantity(q, uv);
    const double da = csl::fd_delta(Q, s, f, csl::make_variation(a), step).value;
    const double db = csl::fd_delta(Q, s, f, csl::make_variation(b), step).value;
    const double dab = csl::fd_delta(Q, s, f, csl::make_variation(a + "+" + b), step).value;
    const double d3 = csl::fd_delta(Q, s, f, csl::make_variation("3*(" + a + ")"), step).value;
    EXPECT_NEAR(dab, da + db, 1e-8) << q;
    EXPECT_NEAR(d3, 3 * da, 1e-8) << q;
  }
}

TEST(Report, VerdictRule) {
  csl::FdEstimate fd;
  fd.value = 1.0;
  fd.error = 1e-9;
  EXPECT_TRUE(csl::make_report("q", 1.0 + 5e-7, fd).pass);
  EXPECT_FALSE(csl::make_report("q", 1.0 + 5e-6, fd).pass);
  fd.error = 1e-6;  // 10 x error widens the gate
  EXPECT_TRUE(csl::make_report("q", 1.0 + 5e-6, fd).pass);
  fd.converged = false;
  const auto r = csl::make_report("q", 1.0, fd);
  EXPECT_FALSE(r.pass);
  ASSERT_EQ(r.flags.size(), 1u);
  EXPECT_EQ(r.flags[0], "fd_not_converged");
}

TEST(DeltaAreaElement, SphereTotalAndZeroSpeed) {
  const double r = 0.8;
  const auto s = csl::make_sphere(r);
  const double total =
      csl::quadrature_total(s, csl::flat_factor(), csl::variation_integrands::area(csl::make_variation("1")), 24, 24, 2);
  EXPECT_NEAR(total, -8 * kPi * r, 1e-10);
  const auto vp = csl::variation_point(s, csl::flat_factor(), csl::make_variation("0"), {1.0, 1.0});
  EXPECT_EQ(csl::delta_area_element_analytic(vp), 0.0);
}

TEST(DeltaAreaElement, MatchesFiniteDifferences) {
  std::mt19937 rng(21);
  const auto s = csl::make_torus(2, 0.5);
  for (const auto& f : {csl::flat_factor(), linear_harmonic(), csl::point_source_factor()}) {
    const auto v = csl::make_variation(random_torus_speed(rng));
    for (const auto& uv : random_nodes(8, 22)) {
      const auto vp = csl::variation_point(s, f, v, uv);
      const auto r = csl::make_report("area_element", csl::delta_area_element_analytic(vp),
                                      csl::fd_delta(csl::point_quantity("area_element", uv), s, f, v));
      EXPECT_LT(r.discrepancy, 1e-6) << f.name;
      EXPECT_TRUE(r.pass);
    }
  }
}

TEST(DeltaMetric, SphereAndPrincipalFrame) {
  const double r = 2.0;
  const auto s = csl::make_sphere(r);
  const auto vp = csl::variation_point(s, csl::flat_factor(), csl::make_variation("1"), {0.4, 1.1});
  const auto& e = vp.geometry.principal_chart;
  EXPECT_NEAR(csl::delta_metric_analytic(vp, e[0], e[0]), -2 / r, 1e-12);
  EXPECT_NEAR(csl::delta_metric_analytic(vp, e[1], e[1]), -2 / r, 1e-12);

  const auto t = csl::make_torus(2, 0.5);
  const auto vt = csl::variation_point(t, linear_harmonic(), csl::make_variation("sin(u)+x"), {0.4, 1.1});
  const auto& et = vt.geometry.principal_chart;
  EXPECT_NEAR(csl::delta_metric_analytic(vt, et[0], et[1]), 0.0, 1e-12);
}

TEST(DeltaMetric, ChartComponentsMatchFiniteDifferences) {
  const auto s = csl::make_torus(2, 0.5);
  const auto v = csl::make_variation("cos(u)*sin(v)+0.2*y");
  for (const auto& f : {csl::flat_factor(), linear_harmonic()}) {
    for (const auto& uv : random_nodes(5, 31)) {
      const auto vp = csl::variation_point(s, f, v, uv);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          const auto q = [uv, i, j](const csl::ClosedSurface& x, const csl::ConformalFactor& g) {
            return csl::surface_at(x, g, uv, 2).induced_metric[i][j];
          };
          csl::Vec2 X{}, Y{};
          X[i] = 1;
          Y[j] = 1;
          const auto fd = csl::fd_delta(q, s, f, v);
          EXPECT_LT(csl::relative_discrepancy(fd.value, csl::delta_metric_analytic(vp, X, Y)), 1e-6);
        }
    }
  }
}

TEST(DeltaWeingarten, SphereUnitSpeedAndZeroSpeed) {
  const double r = 1.7;
  const auto s = csl::make_sphere(r);
  const auto d = csl::delta_weingarten_analytic(
      csl::variation_point(s, csl::flat_factor(), csl::make_variation("1"), {2.0, 0.9}));
  EXPECT_NEAR(d[0][0], 1 / (r * r), 1e-12);
  EXPECT_NEAR(d[1][1], 1 / (r * r), 1e-12);
  EXPECT_NEAR(d[0][1], 0.0, 1e-12);
  const auto z = csl::delta_weingarten_analytic(
      csl::variation_point(csl::make_torus(2, 0.5), linear_harmonic(), csl::make_variation("0"), {2.0, 0.9}));
  for (const auto& row : z)
    for (double c : row) EXPECT_EQ(c, 0.0);
}

TEST(DeltaEigenvalue, SphereMatchesShrinkingRadius) {
  const double r = 1.2;
  const auto s = csl::make_sphere(r);
  const auto v = csl::make_variation("1");
  const csl::Vec2 uv{0.3, 1.0};
  const auto vp = csl::variation_point(s, csl::flat_factor(), v, uv);
  EXPECT_TRUE(vp.geometry.umbilic);
  const auto fd = csl::fd_delta(csl::point_quantity("H", uv), s, csl::flat_factor(), v);
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(csl::delta_eigenvalue_analytic(vp, i), 1 / (r * r), 1e-12);
  EXPECT_NEAR(fd.value, 1 / (r * r), 1e-9);
}

class EigenvalueVariation : public ::testing::TestWithParam<int> {};

TEST_P(EigenvalueVariation, TorusMatchesFiniteDifferences) {
  const auto s = csl::make_torus(2, 0.5);
  const csl::ConformalFactor f = GetParam() == 0 ? csl::flat_factor()
                                 : GetParam() == 1 ? csl::factor_from_sigma("2*ln(1+0.2*x)", true, "linear_harmonic")
                                                   : csl::point_source_factor();
  const auto v = csl::make_variation("sin(u)*cos(v)");
  int checked = 0;
  for (const auto& uv : random_nodes(50, 41)) {
    const auto vp = csl::variation_point(s, f, v, uv);
    if (vp.geometry.umbilic) continue;
    ++checked;
    for (int i = 0; i < 2; ++i) {
      const auto r = csl::make_report(i == 0 ? "lambda1" : "lambda2", csl::delta_eigenvalue_analytic(vp, i),
                                      csl::fd_delta(csl::point_quantity(i == 0 ? "lambda1" : "lambda2", uv), s, f, v));
      EXPECT_LT(r.discrepancy, 1e-6) << f.name << " node (" << uv[0] << ", " << uv[1] << ") i=" << i;
    }
  }
  EXPECT_EQ(checked, 50);
}

INSTANTIATE_TEST_SUITE_P(Factors, EigenvalueVariation, ::testing::Values(0, 1, 2));

TEST(DeltaEigenvalue, LinearInSpeed) {
  const auto s = csl::make_torus(2, 0.5);
  const auto f = linear_harmonic();
  const csl::Vec2 uv{1.3, 0.4};
  const auto a = csl::delta_weingarten_analytic(csl::variation_point(s, f, csl::make_variation("sin(u)"), uv));
  const auto b = csl::delta_weingarten_analytic(csl::variation_point(s, f, csl::make_variation("x*z"), uv));
  const auto ab = csl::delta_weingarten_analytic(csl::variation_point(s, f, csl::make_variation("sin(u)+x*z"), uv));
  const auto a3 = csl::delta_weingarten_analytic(csl::variation_point(s, f, csl::make_variation("-2.5*sin(u)"), uv));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      EXPECT_NEAR(ab[i][j], a[i][j] + b[i][j], 1e-8);
      EXPECT_NEAR(a3[i][j], -2.5 * a[i][j], 1e-8);
    }
}

TEST(DeltaGauss, ClassicalFormMatchesFiniteDifferencesWhenFlat) {
  std::mt19937 rng(51);
  for (const auto& s : {csl::make_torus(2, 0.5), csl::make_perturbed_torus(2, 0.7, 0.1), csl::make_torus(3, 1.2)}) {
    const auto v = csl::make_variation(random_torus_speed(rng));
    for (const auto& uv : random_nodes(10, 52)) {
      const auto d = csl::delta_gauss_curvature_analytic(csl::variation_point(s, csl::flat_factor(), v, uv, 4));
      EXPECT_DOUBLE_EQ(d.stated, d.alternative);
      EXPECT_NEAR(d.stated, d.classical, 1e-12);
      const auto fd = csl::fd_delta(csl::point_quantity("K", uv), s, csl::flat_factor(), v);
      EXPECT_LT(csl::relative_discrepancy(fd.value, d.stated), 1e-6) << s.name();
    }
  }
}

TEST(DeltaGauss, ZeroSpeedLeavesNothing) {
  const auto d = csl::delta_gauss_curvature_analytic(
      csl::variation_point(csl::make_torus(2, 0.5), csl::azimuthal_factor(0.4), csl::make_variation("0"), {1, 2}, 4));
  EXPECT_EQ(d.stated, 0.0);
  EXPECT_EQ(d.divergence, 0.0);
}

TEST(DeltaGauss, TangentPairIsReportOnly) {
  const auto s = csl::make_torus(2, 0.5);
  const auto f = csl::azimuthal_factor(0.4);
  const auto v = csl::make_variation("cos(v)");
  const csl::Vec2 uv{0.9, 2.2};
  const auto d = csl::delta_gauss_curvature_analytic(csl::variation_point(s, f, v, uv, 4));
  EXPECT_LT(d.tangency, 1e-12);
  const auto r = csl::make_report("K", d.stated, csl::fd_delta(csl::point_quantity("K", uv), s, f, v), false);
  EXPECT_FALSE(r.gated);
  EXPECT_TRUE(std::isfinite(r.discrepancy));
  EXPECT_THROW(csl::delta_gauss_curvature_analytic(csl::variation_point(s, f, v, uv, 3)), csl::OrderError);
}

TEST(MeanEl, UnitSphereFlat) {
  const auto s = csl::make_sphere(1);
  for (const auto& uv : random_nodes(5, 61))
    EXPECT_NEAR(csl::mean_el_residual(s, csl::flat_factor(), {uv[0], 0.2 + uv[1] / 2.5}), -2.0, 1e-10);
}

TEST(MeanEl, TotalMeanCurvatureVariation) {
  std::mt19937 rng(71);
  const auto s = csl::make_torus(2, 0.5);
  for (int k = 0; k < 3; ++k) {
    const auto v = csl::make_variation(random_torus_speed(rng));
    const auto fd = csl::fd_delta(csl::functional_quantity("total_H", 64, 64), s, csl::flat_factor(), v);
    const double stated =
        csl::quadrature_total(s, csl::flat_factor(), csl::variation_integrands::total_mean_stated(v), 64, 64, 3);
    EXPECT_LT(csl::relative_discrepancy(fd.value, stated), 1e-6);
  }
  // The closed form with Ric~(N, N) holds for any factor.
  for (const auto& f : {linear_harmonic(), csl::azimuthal_factor(0.4)}) {
    const auto v = csl::make_variation(random_torus_speed(rng));
    const auto fd = csl::fd_delta(csl::functional_quantity("total_H", 64, 64), s, f, v);
    const double general = csl::quadrature_total(s, f, csl::variation_integrands::total_mean_general(v), 64, 64, 3);
    EXPECT_LT(csl::relative_discrepancy(fd.value, general), 1e-6) << f.name;
  }
}

TEST(WillmoreEl, RoundSphereVanishes) {
  const auto s = csl::make_sphere(1.4);
  for (const auto& uv : random_nodes(10, 81))
    EXPECT_LT(std::abs(csl::willmore_el_residual(s, csl::flat_factor(), {uv[0], 0.1 + uv[1] / 2.2})), 1e-9);
  EXPECT_THROW(csl::willmore_el_residual(csl::surface_at(s, csl::flat_factor(), {1, 1}, 3)), csl::OrderError);
}

TEST(WillmoreEl, CliffordTorusVanishes) {
  const auto s = csl::make_clifford_torus(1.0);
  const auto g = csl::make_grid(s, 24, 24);
  double sup = 0.0;
  for (const auto& uv : g.nodes) sup = std::max(sup, std::abs(csl::willmore_el_residual(s, csl::flat_factor(), uv)));
  EXPECT_LT(sup, 1e-6);
  // A generic torus is not critical.
  EXPECT_GT(std::abs(csl::willmore_el_residual(csl::make_torus(2, 0.5), csl::flat_factor(), {0.0, 0.5})), 1e-2);
}

TEST(WillmoreEl, FirstVariationOfWillmoreEnergy) {
  std::mt19937 rng(91);
  const auto s = csl::make_torus(2, 0.5);
  for (int k = 0; k < 3; ++k) {
    const auto v = csl::make_variation(random_torus_speed(rng));
    const auto fd = csl::fd_delta(csl::functional_quantity("willmore", 64, 64), s, csl::flat_factor(), v);
    const double stated =
        csl::quadrature_total(s, csl::flat_factor(), csl::variation_integrands::willmore_stated(v), 64, 64, 4);
    EXPECT_LT(csl::relative_discrepancy(fd.value, stated), 1e-6);
  }
  const auto f = linear_harmonic();
  const auto v = csl::make_variation(random_torus_speed(rng));
  const auto fd = csl::fd_delta(csl::functional_quantity("willmore", 64, 64), s, f, v);
  const double general = csl::quadrature_total(s, f, csl::variation_integrands::willmore_general(v), 64, 64, 4);
  EXPECT_LT(csl::relative_discrepancy(fd.value, general), 1e-6);
}
