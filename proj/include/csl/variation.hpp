#pragma once

// Normal variations X_t = X + t f N. Finite differences over varied surfaces
// are the oracle; the analytic first-variation formulas are evaluated at the
// base surface and compared against them.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "csl/ambient.hpp"
#include "csl/errors.hpp"
#include "csl/expr.hpp"
#include "csl/jet.hpp"
#include "csl/linalg.hpp"
#include "csl/quadrature.hpp"
#include "csl/surface.hpp"

namespace csl {

// Normal speed f over (u, v, x, y, z), evaluated along the base immersion.
// Ambient coordinates keep f single-valued at the poles of latitude charts.
struct NormalVariation {
  FieldExpr f;
  std::string description;
};

inline NormalVariation make_variation(const std::string& text) {
  return {parse_field(text, surface_variables()), text};
}

namespace detail {

// g~-unit normal as jets of `order`; x must carry order + 1.
inline ChartVec3 normal_jets(const ChartVec3& x, const ConformalFactor& factor, int chart_sign, int order) {
  std::array<ChartVec3, 2> dx;
  for (int a = 0; a < 2; ++a)
    for (int k = 0; k < 3; ++k) dx[a][k] = x[k].partial(a).truncated(order);
  const ChartVec3 nn = cross(dx[0], dx[1]);
  ChartJet inv_len = static_cast<double>(chart_sign) * reciprocal(sqrt(dot(nn, nn)));
  if (!factor.is_flat()) {
    const Vec3 x0{x[0].value(), x[1].value(), x[2].value()};
    const JetComposer<3, 2> comp(x, order);
    inv_len = inv_len * exp(-0.5 * comp.compose(factor.sigma_jet(x0, order)));
  }
  return scaled(nn, inv_len);
}

}  // namespace detail

// Loses one jet order against the base: N needs first derivatives of X.
class VariedImmersion final : public ImmersionSource {
 public:
  VariedImmersion(std::shared_ptr<const ImmersionSource> base, ConformalFactor factor, FieldExpr f, int chart_sign,
                  double t)
      : base_(std::move(base)), factor_(std::move(factor)), f_(std::move(f)), sign_(chart_sign), t_(t) {}

  ChartVec3 jets(const Vec2& uv, int order) const override {
    const ChartVec3 x = base_->jets(uv, order + 1);
    ChartVec3 r{x[0].truncated(order), x[1].truncated(order), x[2].truncated(order)};
    if (t_ == 0.0) return r;
    const ChartVec3 n = detail::normal_jets(x, factor_, sign_, order);
    const ChartJet speed = t_ * chart_scalar(f_, uv, x, order);
    for (int k = 0; k < 3; ++k) r[k] += speed * n[k];
    return r;
  }
  int max_order() const override { return base_->max_order() - 1; }

 private:
  std::shared_ptr<const ImmersionSource> base_;
  ConformalFactor factor_;
  FieldExpr f_;
  int sign_;
  double t_;
};

// Same chart, orientation sign and length scale as the base; regularity is
// checked node by node when the varied geometry is evaluated.
inline ClosedSurface vary_surface(const ClosedSurface& surface, const ConformalFactor& factor,
                                  const NormalVariation& variation, double t) {
  return {surface.name(), surface.topology(),
          std::make_shared<VariedImmersion>(surface.source_ptr(), factor, variation.f, surface.chart_sign(), t),
          surface.domain(), surface.orientation(), surface.frame()};
}

// ---------------------------------------------------------------------------
// Finite-difference oracle.

using SurfaceQuantity = std::function<double(const ClosedSurface&, const ConformalFactor&)>;

inline constexpr double kFdRelativeStep = 1e-3;
// The error estimate is the t^2 term of the finer difference; when it is a
// relative eps the extrapolated value is good to about eps^2.
inline constexpr double kFdConvergence = 1e-3;

struct FdEstimate {
  double value = 0.0;
  double error = 0.0;               // |D(t1) - D(t2)| / 3
  std::array<double, 2> steps{};
  bool converged = true;            // relative error below kFdConvergence
};

// Central differences at t1 and t1 / 2, Richardson-combined.
inline FdEstimate fd_delta(const SurfaceQuantity& quantity, const ClosedSurface& surface, const ConformalFactor& factor,
                           const NormalVariation& variation, double step = 0.0) {
  const double t1 = step > 0.0 ? step : kFdRelativeStep * surface.scale(), t2 = 0.5 * t1;
  auto central = [&](double t) {
    const double qp = quantity(vary_surface(surface, factor, variation, t), factor);
    const double qm = quantity(vary_surface(surface, factor, variation, -t), factor);
    return (qp - qm) / (2.0 * t);
  };
  const double d1 = central(t1), d2 = central(t2);
  FdEstimate r;
  r.value = (4.0 * d2 - d1) / 3.0;
  r.error = std::abs(d1 - d2) / 3.0;
  r.steps = {t1, t2};
  r.converged = r.error <= kFdConvergence * std::max(1.0, std::abs(r.value));
  return r;
}

// Pointwise quantities: lambda1, lambda2, H, K, area_element.
inline SurfaceQuantity point_quantity(const std::string& name, const Vec2& uv) {
  if (name == "lambda1" || name == "lambda2") {
    const int i = name == "lambda1" ? 0 : 1;
    return [uv, i](const ClosedSurface& s, const ConformalFactor& f) {
      return surface_at(s, f, uv, 2).principal_curvatures[i];
    };
  }
  if (name == "H")
    return [uv](const ClosedSurface& s, const ConformalFactor& f) { return surface_at(s, f, uv, 2).mean_curvature; };
  if (name == "K")
    return [uv](const ClosedSurface& s, const ConformalFactor& f) { return surface_at(s, f, uv, 3).gauss_intrinsic; };
  if (name == "area_element")
    return [uv](const ClosedSurface& s, const ConformalFactor& f) { return surface_at(s, f, uv, 2).area_density; };
  throw ConfigError("", 0, "unknown pointwise quantity '" + name + "'");
}

// Quadrature total without the half-grid error pass.
inline double quadrature_total(const ClosedSurface& s, const ConformalFactor& f, const Integrand& integrand, int nu,
                               int nv, int order) {
  const auto grid = make_grid(s, nu, nv);
  std::vector<double> density;
  const auto values = sample_integrands(s, f, grid, {integrand}, order, &density);
  return detail::weighted_total(grid, values.front(), density);
}

// Functionals: area, total_H, willmore, gauss_bonnet.
inline SurfaceQuantity functional_quantity(const std::string& name, int nu, int nv) {
  Integrand in;
  int order = 2;
  if (name == "area") {
    in = integrands::area();
  } else if (name == "total_H") {
    in = integrands::mean_curvature();
  } else if (name == "willmore") {
    in = integrands::willmore();
  } else if (name == "gauss_bonnet") {
    in = integrands::gauss();
    order = 3;
  } else {
    throw ConfigError("", 0, "unknown functional '" + name + "'");
  }
  return [in, order, nu, nv](const ClosedSurface& s, const ConformalFactor& f) {
    return quadrature_total(s, f, in, nu, nv, order);
  };
}

inline bool is_point_quantity(const std::string& name) {
  return name == "lambda1" || name == "lambda2" || name == "H" || name == "K" || name == "area_element";
}

// ---------------------------------------------------------------------------
// Reports.

inline double relative_discrepancy(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0});
}

struct VariationReport {
  std::string quantity;
  double analytic = 0.0;
  FdEstimate fd;
  double discrepancy = 0.0;
  bool gated = true;                // false: emitted for the record, never fails
  bool pass = false;
  std::vector<std::string> flags;   // hypotheses the formula relies on that do not hold here
};

// pass iff discrepancy < max(1e-6, 10 x relative FD error).
inline VariationReport make_report(std::string quantity, double analytic, const FdEstimate& fd, bool gated = true) {
  VariationReport r;
  r.quantity = std::move(quantity);
  r.analytic = analytic;
  r.fd = fd;
  r.discrepancy = relative_discrepancy(analytic, fd.value);
  const double err = fd.error / std::max({std::abs(analytic), std::abs(fd.value), 1.0});
  r.gated = gated;
  r.pass = fd.converged && r.discrepancy < std::max(1e-6, 10.0 * err);
  if (!fd.converged) r.flags.push_back("fd_not_converged");
  return r;
}

// ---------------------------------------------------------------------------
// Analytic first variations at a base node.

struct VariationPoint {
  SurfacePointGeometry geometry;
  ChartJet f;  // order min(immersion order, 2)
};

inline VariationPoint variation_point(const ClosedSurface& surface, const ConformalFactor& factor,
                                      const NormalVariation& variation, const Vec2& uv, int order = 3) {
  VariationPoint vp{surface_at(surface, factor, uv, order), {}};
  vp.f = chart_scalar(variation.f, uv, vp.geometry.jets.x, std::min(order, 2));
  return vp;
}

// delta(dOmega) = -2 f H dOmega for normal variations.
inline double delta_area_element_analytic(const VariationPoint& vp) {
  return -2.0 * vp.f.value() * vp.geometry.mean_curvature * vp.geometry.area_density;
}

// (delta g~)(X, Y) = -2 f g~(AX, Y) for chart vectors X, Y.
inline double delta_metric_analytic(const VariationPoint& vp, const Vec2& X, const Vec2& Y) {
  const auto& sp = vp.geometry;
  return -2.0 * vp.f.value() * sp.g(sp.apply_a(X), Y);
}

// g~(delta A(e_j), e_i) in the principal frame:
// f (g~(R~(e_j, N) N, e_i) + lambda_i^2 delta_ij) + Hess_f(e_i, e_j).
// The diagonal is delta lambda_i; the curvature term on it is K~(e_i, N).
inline Mat2 delta_weingarten_analytic(const VariationPoint& vp) {
  const auto& sp = vp.geometry;
  const double f = vp.f.value();
  const Mat2 hf = sp.hessian(vp.f);
  const auto& e = sp.principal_chart;
  const auto& E = sp.principal_directions;
  Mat2 r{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      double c = sp.ambient.g(sp.ambient.curvature(E[j], sp.normal, sp.normal), E[i]);
      if (i == j) c += sp.principal_curvatures[i] * sp.principal_curvatures[i];
      r[i][j] = f * c + bilinear(hf, e[i], e[j]);
    }
  return r;
}

// Meaningful only away from umbilics, where the eigenvalue branches separate.
inline double delta_eigenvalue_analytic(const VariationPoint& vp, int i) { return delta_weingarten_analytic(vp)[i][i]; }

inline double delta_mean_curvature_analytic(const VariationPoint& vp) {
  const Mat2 d = delta_weingarten_analytic(vp);
  return 0.5 * (d[0][0] + d[1][1]);
}

namespace detail {

// Chart components of the tangential part of f nabla~_N omega_sharp, order p - 3.
inline std::array<ChartJet, 2> tangential_delta_omega_sharp(const VariationPoint& vp) {
  const SurfaceJets& J = vp.geometry.jets;
  if (J.order < 4) throw OrderError("the omega_sharp variation needs immersion jets of order 4");
  const ChartJet w2 = dot(J.w, J.w);
  const ChartJet em = exp(-1.0 * J.s);
  ChartVec3 y;
  for (int l = 0; l < 3; ++l) {
    ChartJet acc = 0.5 * w2 * J.n[l];
    for (int i = 0; i < 3; ++i) acc += J.n[i] * (J.hess[i][l] - J.w[i] * J.w[l]);
    y[l] = vp.f * em * acc;
  }
  const ChartJet es = exp(J.s);
  const std::array<ChartJet, 2> low{es * dot(y, J.dx[0]), es * dot(y, J.dx[1])};
  return {J.ginv[0][0] * low[0] + J.ginv[0][1] * low[1], J.ginv[1][0] * low[0] + J.ginv[1][1] * low[1]};
}

}  // namespace detail

// Right side of the delta K theorem, term by term. With M = 2H - A and
// S = A - H the frame sums are traces, smooth through umbilics:
//   (f/2)(lambda_1 - lambda_2)(T(e_1,e_1) - T(e_2,e_2)) = f tr(T^# S),  T = g~(nabla~ omega_sharp, .)
//   lambda_1 Hess_f(e_2,e_2) + lambda_2 Hess_f(e_1,e_1) = tr(Hess_f^# M).
struct DeltaGaussTerms {
  double omega_shear = 0.0;         // f tr(T^# S)
  double hessian = 0.0;             // tr(Hess_f^# M)
  double divergence = 0.0;          // -div(f nabla~_N omega_sharp)^T / 2
  double extrinsic = 0.0;           // 2 f H lambda_1 lambda_2
  double omega_gradient = 0.0;      // -H omega(grad f) - omega(A grad f)
  double omega_norm = 0.0;          // f H |omega_sharp|^2, times 1/8 or 1/2
  double stated = 0.0;              // coefficient 1/8
  double alternative = 0.0;         // coefficient 1/2
  double classical = 0.0;           // hessian + extrinsic; exact when sigma = 0
  double tangency = 0.0;            // |omega(N)| at the node
};

inline DeltaGaussTerms delta_gauss_curvature_analytic(const VariationPoint& vp) {
  const auto& sp = vp.geometry;
  const double f = vp.f.value(), H = sp.mean_curvature;
  Mat2 shear = sp.shape_operator;
  shear[0][0] -= H;
  shear[1][1] -= H;
  Mat2 t{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      t[i][j] = sp.ambient.g(sp.ambient.nabla_omega_sharp(sp.tangent_basis[i]), sp.tangent_basis[j]);

  DeltaGaussTerms r;
  r.omega_shear = f * detail::trace_product(sp.metric_inverse * t, shear);
  r.hessian = detail::trace_product(sp.metric_inverse * sp.hessian(vp.f), detail::complementary_shape(sp));
  r.divergence = -0.5 * sp.divergence(detail::tangential_delta_omega_sharp(vp));
  r.extrinsic = 2.0 * f * H * sp.extrinsic_gauss;
  const Vec2 grad = sp.gradient(vp.f);
  r.omega_gradient = -H * sp.omega_of(grad) - sp.omega_of(sp.apply_a(grad));
  r.omega_norm = f * H * sp.omega_sharp_norm2;
  const double common = r.omega_shear + r.hessian + r.divergence + r.extrinsic + r.omega_gradient;
  r.stated = common + r.omega_norm / 8.0;
  r.alternative = common + r.omega_norm / 2.0;
  r.classical = r.hessian + r.extrinsic;
  r.tangency = sp.tangency_residual;
  return r;
}

// ---------------------------------------------------------------------------
// Euler-Lagrange residual fields.

// |omega_sharp|^2 - lambda_1 lambda_2 - K; needs order-3 geometry.
inline double mean_el_residual(const SurfacePointGeometry& sp) {
  return sp.omega_sharp_norm2 - sp.extrinsic_gauss - sp.gauss_intrinsic;
}

// W = Laplacian H + H (|omega_sharp|^2 - lambda_1 lambda_2 + 2H^2 - K); needs order-4 geometry.
inline double willmore_el_residual(const SurfacePointGeometry& sp) {
  if (sp.jets.order < 4) throw OrderError("the Willmore residual needs immersion jets of order 4");
  const double H = sp.mean_curvature;
  return sp.laplacian(sp.jets.H) + H * (sp.omega_sharp_norm2 - sp.extrinsic_gauss + 2 * H * H - sp.gauss_intrinsic);
}

inline double mean_el_residual(const ClosedSurface& s, const ConformalFactor& f, const Vec2& uv) {
  return mean_el_residual(surface_at(s, f, uv, 3));
}
inline double willmore_el_residual(const ClosedSurface& s, const ConformalFactor& f, const Vec2& uv) {
  return willmore_el_residual(surface_at(s, f, uv, 4));
}

// ---------------------------------------------------------------------------
// Analytic first variations of the functionals, as quadrature integrands.
// Each returns the integrand before the area density.

namespace variation_integrands {

inline double speed(const NormalVariation& v, const SurfacePointGeometry& sp) {
  return chart_scalar(v.f, sp.chart_point, sp.jets.x, 0).value();
}

// delta area = -2 int f H.
inline Integrand area(const NormalVariation& v) {
  return {"delta_area", [v](const SurfacePointGeometry& sp) { return -2.0 * speed(v, sp) * sp.mean_curvature; }};
}

// delta int H, closed form holding for every ambient factor:
// int f (Ric~(N, N) / 2 - lambda_1 lambda_2).
inline Integrand total_mean_general(const NormalVariation& v) {
  return {"delta_total_H_general", [v](const SurfacePointGeometry& sp) {
            return speed(v, sp) * (0.5 * sp.ambient.ricci_of(sp.normal, sp.normal) - sp.extrinsic_gauss);
          }};
}

// delta int H as the mean-curvature theorem states it:
// -1/2 int f (lambda_1 lambda_2 + K - |omega_sharp|^2).
inline Integrand total_mean_stated(const NormalVariation& v) {
  return {"delta_total_H_stated", [v](const SurfacePointGeometry& sp) {
            return 0.5 * speed(v, sp) * mean_el_residual(sp);
          }};
}

// delta int H^2 for every ambient factor:
// int f (Laplacian H + H Ric~(N, N) + 2H^3 - 2H lambda_1 lambda_2). Order 4.
inline Integrand willmore_general(const NormalVariation& v) {
  return {"delta_willmore_general", [v](const SurfacePointGeometry& sp) {
            const double H = sp.mean_curvature;
            return speed(v, sp) * (sp.laplacian(sp.jets.H) + H * sp.ambient.ricci_of(sp.normal, sp.normal) +
                                   2 * H * H * H - 2 * H * sp.extrinsic_gauss);
          }};
}

// delta int H^2 as the Willmore theorem states it: int f W. Order 4.
inline Integrand willmore_stated(const NormalVariation& v) {
  return {"delta_willmore_stated",
          [v](const SurfacePointGeometry& sp) { return speed(v, sp) * willmore_el_residual(sp); }};
}

}  // namespace variation_integrands

}  // namespace csl
