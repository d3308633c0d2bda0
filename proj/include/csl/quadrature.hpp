#pragma once

// Surface quadrature and the global integral identities.
//
// Torus-like charts use the periodic trapezoid rule on both axes. Latitude
// charts use the trapezoid rule in longitude and Gauss-Legendre in the polar
// angle, so no node sits on a pole.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "csl/ambient.hpp"
#include "csl/errors.hpp"
#include "csl/parallel.hpp"
#include "csl/surface.hpp"

namespace csl {

enum class QuadratureRule { trapezoid_periodic, gauss_legendre_latitude };

inline const char* to_string(QuadratureRule r) {
  return r == QuadratureRule::trapezoid_periodic ? "trapezoid_periodic" : "gauss_legendre_latitude";
}

struct QuadratureGrid {
  QuadratureRule rule = QuadratureRule::trapezoid_periodic;
  int nu = 0, nv = 0;
  std::vector<Vec2> nodes;     // index i * nv + j
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

// Gauss-Legendre nodes and weights on [a, b], ascending.
inline void gauss_legendre(int n, double a, double b, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    if (n == 1) dp = 1.0;
    const double wi = 2.0 / ((1.0 - z * z) * dp * dp);
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    x[i] = mid - half * z;
    x[n - 1 - i] = mid + half * z;
    w[i] = w[n - 1 - i] = wi * half;
  }
}

inline QuadratureGrid make_grid(Topology topology, const ChartDomain& d, int nu, int nv) {
  if (nu < 2 || nv < 2) throw ConvergenceError("quadrature resolution must be at least 2 x 2");
  QuadratureGrid g;
  g.nu = nu;
  g.nv = nv;
  const double du = (d.u[1] - d.u[0]) / nu;
  std::vector<double> vx(nv), vw(nv);
  if (topology == Topology::torus_like) {
    g.rule = QuadratureRule::trapezoid_periodic;
    const double dv = (d.v[1] - d.v[0]) / nv;
    for (int j = 0; j < nv; ++j) {
      vx[j] = d.v[0] + j * dv;
      vw[j] = dv;
    }
  } else {
    g.rule = QuadratureRule::gauss_legendre_latitude;
    gauss_legendre(nv, d.v[0], d.v[1], vx, vw);
  }
  g.nodes.reserve(static_cast<std::size_t>(nu) * nv);
  g.weights.reserve(g.nodes.capacity());
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      g.nodes.push_back({d.u[0] + i * du, vx[j]});
      g.weights.push_back(du * vw[j]);
    }
  return g;
}

inline QuadratureGrid make_grid(const ClosedSurface& s, int nu, int nv) {
  return make_grid(s.topology(), s.domain(), nu, nv);
}

// Pairwise summation in index order: deterministic and accurate.
inline double pairwise_sum(const double* a, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(a, h) + pairwise_sum(a + h, n - h);
}
inline double pairwise_sum(const std::vector<double>& a) { return pairwise_sum(a.data(), a.size()); }

struct IntegralReport {
  std::string name;
  double value = 0.0;
  double error = 0.0;  // |value(n) - value(n/2)|
  int nu = 0, nv = 0;
  double integrand_min = 0.0, integrand_max = 0.0;
  Vec2 argmin{}, argmax{};
};

// Per-node scalar integrand; the quadrature multiplies by the area density.
struct Integrand {
  std::string name;
  std::function<double(const SurfacePointGeometry&)> fn;
};

// Evaluates every integrand at every node of `grid`; values[k][node].
inline std::vector<std::vector<double>> sample_integrands(const ClosedSurface& s, const ConformalFactor& f,
                                                          const QuadratureGrid& grid,
                                                          const std::vector<Integrand>& integrands, int order,
                                                          std::vector<double>* area_density = nullptr) {
  const std::size_t n = grid.size(), m = integrands.size();
  std::vector<std::vector<double>> values(m, std::vector<double>(n));
  if (area_density) area_density->assign(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    const Vec2& uv = grid.nodes[i];
    try {
      const auto sp = surface_at(s, f, uv, order);
      for (std::size_t k = 0; k < m; ++k) values[k][i] = integrands[k].fn(sp);
      if (area_density) (*area_density)[i] = sp.area_density;
    } catch (const Error& e) {
      throw Error(std::string(e.what()) + " [node (u, v) = (" + std::to_string(uv[0]) + ", " + std::to_string(uv[1]) +
                  ") on " + s.name() + "]");
    }
  });
  return values;
}

namespace detail {

inline double weighted_total(const QuadratureGrid& g, const std::vector<double>& integrand,
                             const std::vector<double>& density) {
  std::vector<double> terms(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) terms[i] = g.weights[i] * integrand[i] * density[i];
  return pairwise_sum(terms);
}

}  // namespace detail

// Integrals of several integrands at (nu, nv) with the error estimate from
// (nu/2, nv/2). Periodic grids reuse the nested half-resolution nodes.
inline std::vector<IntegralReport> integrate_all(const ClosedSurface& s, const ConformalFactor& f,
                                                 const std::vector<Integrand>& integrands, int nu, int nv,
                                                 int order = 3) {
  const auto grid = make_grid(s, nu, nv);
  std::vector<double> density;
  const auto values = sample_integrands(s, f, grid, integrands, order, &density);

  const int hu = nu / 2, hv = nv / 2;
  const auto half = make_grid(s, hu, hv);
  std::vector<std::vector<double>> half_values;
  std::vector<double> half_density;
  const bool nested = grid.rule == QuadratureRule::trapezoid_periodic && nu % 2 == 0 && nv % 2 == 0;
  if (nested) {
    half_values.assign(integrands.size(), std::vector<double>(half.size()));
    half_density.resize(half.size());
    for (int i = 0; i < hu; ++i)
      for (int j = 0; j < hv; ++j) {
        const std::size_t src = static_cast<std::size_t>(2 * i) * nv + 2 * j, dst = static_cast<std::size_t>(i) * hv + j;
        half_density[dst] = density[src];
        for (std::size_t k = 0; k < integrands.size(); ++k) half_values[k][dst] = values[k][src];
      }
  } else {
    half_values = sample_integrands(s, f, half, integrands, order, &half_density);
  }

  std::vector<IntegralReport> out;
  for (std::size_t k = 0; k < integrands.size(); ++k) {
    IntegralReport r;
    r.name = integrands[k].name;
    r.nu = nu;
    r.nv = nv;
    r.value = detail::weighted_total(grid, values[k], density);
    r.error = std::abs(r.value - detail::weighted_total(half, half_values[k], half_density));
    const auto [lo, hi] = std::minmax_element(values[k].begin(), values[k].end());
    r.integrand_min = *lo;
    r.integrand_max = *hi;
    r.argmin = grid.nodes[lo - values[k].begin()];
    r.argmax = grid.nodes[hi - values[k].begin()];
    out.push_back(r);
  }
  return out;
}

inline IntegralReport integrate(const ClosedSurface& s, const ConformalFactor& f, const Integrand& integrand, int nu,
                                int nv, int order = 3) {
  return integrate_all(s, f, {integrand}, nu, nv, order).front();
}

// ---------------------------------------------------------------------------
// Named integrands.

namespace integrands {

inline Integrand area() {
  return {"area", [](const SurfacePointGeometry&) { return 1.0; }};
}
inline Integrand mean_curvature() {
  return {"total_mean_curvature", [](const SurfacePointGeometry& p) { return p.mean_curvature; }};
}
inline Integrand willmore() {
  return {"willmore_energy", [](const SurfacePointGeometry& p) { return p.mean_curvature * p.mean_curvature; }};
}
inline Integrand gauss() {
  return {"total_gauss_curvature", [](const SurfacePointGeometry& p) { return p.gauss_intrinsic; }};
}
inline Integrand omega_sharp_norm2() {
  return {"omega_sharp_norm2", [](const SurfacePointGeometry& p) { return p.omega_sharp_norm2; }};
}
inline Integrand mean_times_omega_sharp_norm2() {
  return {"minimality_integral",
          [](const SurfacePointGeometry& p) { return p.mean_curvature * p.omega_sharp_norm2; }};
}

}  // namespace integrands

struct GaussBonnet {
  IntegralReport integral;
  double chi = 0.0;
};

inline GaussBonnet gauss_bonnet_check(const ClosedSurface& s, const ConformalFactor& f, int nu, int nv) {
  GaussBonnet gb;
  gb.integral = integrate(s, f, integrands::gauss(), nu, nv, 3);
  gb.chi = gb.integral.value / (2 * std::numbers::pi);
  return gb;
}

inline IntegralReport euler_characteristic_estimate(const ClosedSurface& s, const ConformalFactor& f, int nu, int nv) {
  auto r = integrate(s, f, integrands::omega_sharp_norm2(), nu, nv, 2);
  const double c = 5.0 / (16.0 * std::numbers::pi);
  r.name = "chi_estimate";
  r.value *= c;
  r.error *= c;
  return r;
}

inline IntegralReport minimality_integral(const ClosedSurface& s, const ConformalFactor& f, int nu, int nv) {
  return integrate(s, f, integrands::mean_times_omega_sharp_norm2(), nu, nv, 2);
}

// ---------------------------------------------------------------------------
// Integral identities built on the principal frame. With M = 2H - A, which
// maps e_1 to lambda_2 e_1 and e_2 to lambda_1 e_2,
//   lambda_2 T(e_1, e_1) + lambda_1 T(e_2, e_2) = tr(T^# M)
// for any bilinear T, so the integrands stay smooth through umbilics.

namespace detail {

inline Mat2 complementary_shape(const SurfacePointGeometry& p) {
  const double tr = p.shape_operator[0][0] + p.shape_operator[1][1];
  Mat2 m{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m[i][j] = (i == j ? tr : 0.0) - p.shape_operator[i][j];
  return m;
}

inline double trace_product(const Mat2& a, const Mat2& b) {
  return a[0][0] * b[0][0] + a[0][1] * b[1][0] + a[1][0] * b[0][1] + a[1][1] * b[1][1];
}

inline Vec2 values(const std::array<ChartJet, 2>& v) { return {v[0].value(), v[1].value()}; }

}  // namespace detail

// lambda_2 g(nabla_{e_1} X, e_1) + lambda_1 g(nabla_{e_2} X, e_2) - omega(AX) / 2
inline double minkowski_integrand(const SurfacePointGeometry& p, const std::array<ChartJet, 2>& X) {
  const Mat2 dx = p.covariant_derivative(X);
  const Vec2 x = detail::values(X);
  return detail::trace_product(dx, detail::complementary_shape(p)) - 0.5 * p.omega_of(p.apply_a(x));
}

// Same left part with Ric~(X, N) in place of -omega(AX) / 2. This form holds
// for every closed surface; the two agree when the surface is tangent to omega_sharp.
inline double minkowski_ricci_integrand(const SurfacePointGeometry& p, const std::array<ChartJet, 2>& X) {
  const Mat2 dx = p.covariant_derivative(X);
  const Vec2 x = detail::values(X);
  return detail::trace_product(dx, detail::complementary_shape(p)) + p.ambient.ricci_of(p.to_ambient(x), p.normal);
}

// f (lambda_2 Hess_g(e_1,e_1) + lambda_1 Hess_g(e_2,e_2) - omega(A grad g) / 2)
inline double hessian_pair_integrand(const SurfacePointGeometry& p, const ChartJet& f, const ChartJet& g) {
  const Mat2 hs = p.metric_inverse * p.hessian(g);
  return f.value() *
         (detail::trace_product(hs, detail::complementary_shape(p)) - 0.5 * p.omega_of(p.apply_a(p.gradient(g))));
}

inline double hessian_pair_ricci_integrand(const SurfacePointGeometry& p, const ChartJet& f, const ChartJet& g) {
  const Mat2 hs = p.metric_inverse * p.hessian(g);
  return f.value() * (detail::trace_product(hs, detail::complementary_shape(p)) +
                      p.ambient.ricci_of(p.to_ambient(p.gradient(g)), p.normal));
}

struct IdentityReport {
  std::string name;
  double residual = 0.0;          // integral as stated
  double general_residual = 0.0;  // Ricci form
  double error = 0.0;             // quadrature error estimate of the stated form
  double general_error = 0.0;
  double max_tangency = 0.0;      // sup |omega(N)| over nodes
};

inline IdentityReport prop_am110_identity(const ClosedSurface& s, const ConformalFactor& f,
                                          const std::array<FieldExpr, 3>& field, int nu, int nv) {
  const std::vector<Integrand> parts{
      {"stated", [&](const SurfacePointGeometry& p) { return minkowski_integrand(p, project_tangent(p, field)); }},
      {"general", [&](const SurfacePointGeometry& p) { return minkowski_ricci_integrand(p, project_tangent(p, field)); }},
      {"tangency", [](const SurfacePointGeometry& p) { return p.tangency_residual; }}};
  const auto r = integrate_all(s, f, parts, nu, nv, 3);
  return {"minkowski_identity", std::abs(r[0].value), std::abs(r[1].value), r[0].error, r[1].error,
          r[2].integrand_max};
}

inline IdentityReport prop_am123_identity(const ClosedSurface& s, const ConformalFactor& f, const FieldExpr& fa,
                                          const FieldExpr& fb, int nu, int nv) {
  auto jets = [&](const SurfacePointGeometry& p) {
    return std::pair{chart_scalar(fa, p.chart_point, p.jets.x, 2), chart_scalar(fb, p.chart_point, p.jets.x, 2)};
  };
  const std::vector<Integrand> parts{
      {"stated", [&](const SurfacePointGeometry& p) {
         const auto [a, b] = jets(p);
         return hessian_pair_integrand(p, a, b) - hessian_pair_integrand(p, b, a);
       }},
      {"general", [&](const SurfacePointGeometry& p) {
         const auto [a, b] = jets(p);
         return hessian_pair_ricci_integrand(p, a, b) - hessian_pair_ricci_integrand(p, b, a);
       }},
      {"tangency", [](const SurfacePointGeometry& p) { return p.tangency_residual; }}};
  const auto r = integrate_all(s, f, parts, nu, nv, 3);
  return {"hessian_symmetry_identity", std::abs(r[0].value), std::abs(r[1].value), r[0].error, r[1].error,
          r[2].integrand_max};
}

}  // namespace csl
