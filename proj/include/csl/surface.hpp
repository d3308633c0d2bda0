#pragma once

// Closed parametric surfaces in (R^3, e^sigma <,>) and their pointwise
// geometry. Every derived scalar is carried as a chart jet, so surface
// differential operators differentiate exactly.
//
// Conventions: A(X) = -nabla~_X N, h(X,Y) = g~(AX, Y), lambda_1 >= lambda_2,
// H = (lambda_1 + lambda_2) / 2.

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>

#include "csl/ambient.hpp"
#include "csl/errors.hpp"
#include "csl/expr.hpp"
#include "csl/jet.hpp"
#include "csl/linalg.hpp"

namespace csl {

enum class Topology { sphere_like, torus_like };
enum class Orientation { inward, outward, chart };

inline const char* to_string(Topology t) { return t == Topology::sphere_like ? "sphere_like" : "torus_like"; }
inline const char* to_string(Orientation o) {
  switch (o) {
    case Orientation::inward: return "inward";
    case Orientation::outward: return "outward";
    default: return "chart";
  }
}

using ChartVec3 = std::array<ChartJet, 3>;
using JetMat2 = std::array<std::array<ChartJet, 2>, 2>;

// Source of immersion chart jets X(u,v) expanded at a chart point.
class ImmersionSource {
 public:
  virtual ~ImmersionSource() = default;
  virtual ChartVec3 jets(const Vec2& uv, int order) const = 0;
  virtual int max_order() const { return kMaxJetOrder; }
};

class ExprImmersion final : public ImmersionSource {
 public:
  explicit ExprImmersion(std::array<FieldExpr, 3> components) : x_(std::move(components)) {
    for (const auto& c : x_)
      if (c.variables() != chart_variables()) throw ArityError("immersion components must be expressions in (u, v)");
  }
  ChartVec3 jets(const Vec2& uv, int order) const override {
    return {jet_eval<2>(x_[0], uv, order), jet_eval<2>(x_[1], uv, order), jet_eval<2>(x_[2], uv, order)};
  }
  const std::array<FieldExpr, 3>& components() const { return x_; }

 private:
  std::array<FieldExpr, 3> x_;
};

struct ChartDomain {
  Vec2 u{0.0, 2 * std::numbers::pi};
  Vec2 v{0.0, 2 * std::numbers::pi};
};

class ClosedSurface {
 public:
  ClosedSurface(std::string name, Topology topology, std::shared_ptr<const ImmersionSource> source, ChartDomain domain,
                Orientation orientation = Orientation::inward, std::optional<int> chart_sign = std::nullopt)
      : name_(std::move(name)),
        topology_(topology),
        source_(std::move(source)),
        domain_(domain),
        orientation_(orientation) {
    survey();
    if (chart_sign) sign_ = *chart_sign;
  }

  // Orientation sign, length scale and chart volume, normally found by the survey.
  struct Frame {
    int chart_sign = 1;
    double scale = 1.0;
    double volume = 0.0;
  };

  // Skips the survey. Varied copies of a surface inherit their base frame this way.
  ClosedSurface(std::string name, Topology topology, std::shared_ptr<const ImmersionSource> source, ChartDomain domain,
                Orientation orientation, const Frame& frame)
      : name_(std::move(name)),
        topology_(topology),
        source_(std::move(source)),
        domain_(domain),
        orientation_(orientation),
        sign_(frame.chart_sign),
        volume_(frame.volume),
        scale_(frame.scale) {}

  Frame frame() const { return {sign_, scale_, volume_}; }

  const std::string& name() const { return name_; }
  Topology topology() const { return topology_; }
  const ChartDomain& domain() const { return domain_; }
  Orientation orientation() const { return orientation_; }
  const ImmersionSource& source() const { return *source_; }
  std::shared_ptr<const ImmersionSource> source_ptr() const { return source_; }

  ChartVec3 chart_jets(const Vec2& uv, int order) const {
    if (order > source_->max_order())
      throw OrderError("surface '" + name_ + "' provides chart jets up to order " + std::to_string(source_->max_order()));
    return source_->jets(uv, order);
  }
  Vec3 position(const Vec2& uv) const {
    const auto x = source_->jets(uv, 0);
    return {x[0].value(), x[1].value(), x[2].value()};
  }

  // +1 when N follows d_u X x d_v X, -1 when it is reversed.
  int chart_sign() const { return sign_; }
  // Signed enclosed Euclidean volume using the chart orientation.
  double chart_volume() const { return volume_; }
  // Largest bounding-box side; the length scale for steps and tolerances.
  double scale() const { return scale_; }

 private:
  void survey() {
    // Midpoint rule: interior nodes only, so latitude charts never touch a pole.
    const int n = 48;
    const double du = (domain_.u[1] - domain_.u[0]) / n, dv = (domain_.v[1] - domain_.v[0]) / n;
    Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
    double vol = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Vec2 uv{domain_.u[0] + (i + 0.5) * du, domain_.v[0] + (j + 0.5) * dv};
        const auto x = source_->jets(uv, 1);
        const Vec3 p{x[0].value(), x[1].value(), x[2].value()};
        const Vec3 xu{x[0].d(0), x[1].d(0), x[2].d(0)}, xv{x[0].d(1), x[1].d(1), x[2].d(1)};
        vol += dot(p, cross(xu, xv)) * du * dv / 3.0;
        for (int k = 0; k < 3; ++k) {
          lo[k] = std::min(lo[k], p[k]);
          hi[k] = std::max(hi[k], p[k]);
        }
      }
    volume_ = vol;
    scale_ = std::max({hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]});
    switch (orientation_) {
      case Orientation::chart: sign_ = 1; break;
      case Orientation::inward: sign_ = vol > 0 ? -1 : 1; break;
      case Orientation::outward: sign_ = vol > 0 ? 1 : -1; break;
    }
  }

  std::string name_;
  Topology topology_;
  std::shared_ptr<const ImmersionSource> source_;
  ChartDomain domain_;
  Orientation orientation_;
  int sign_ = 1;
  double volume_ = 0.0;
  double scale_ = 1.0;
};

// Chart jets at one node. Orders for immersion order p: x p, dx/g/n p-1,
// h/A/H/Kext/Christoffels p-2, K and composed sigma Hessian p-3.
struct SurfaceJets {
  int order = 0;
  ChartVec3 x;
  std::array<ChartVec3, 2> dx;
  ChartJet s;                                 // sigma o X
  ChartVec3 w;                                // (d_k sigma) o X
  std::array<ChartVec3, 3> hess;              // (d_k d_l sigma) o X, present when order >= 3
  JetMat2 e0;                                 // Euclidean first fundamental form
  JetMat2 g, ginv;
  ChartJet sqrt_g;
  ChartVec3 n;                                // g~-unit normal
  JetMat2 h;                                  // h_ij
  JetMat2 a;                                  // A^i_j, A(d_j) = A^i_j d_i
  ChartJet H, Kext;
  std::array<JetMat2, 2> gamma;               // gamma[k][i][j] induced Christoffels
  std::optional<ChartJet> K;                  // Brioschi, present when order >= 3
};

struct SurfacePointGeometry {
  Vec2 chart_point{};
  Vec3 position{};
  std::array<Vec3, 2> tangent_basis{};
  Mat2 induced_metric{};
  Mat2 metric_inverse{};
  double area_density = 0.0;
  Vec3 normal{};
  Mat2 shape_operator{};
  std::array<double, 2> principal_curvatures{};
  std::array<Vec2, 2> principal_chart{};      // chart components of e_1, e_2
  std::array<Vec3, 2> principal_directions{};
  bool umbilic = false;
  double mean_curvature = 0.0;
  double extrinsic_gauss = 0.0;               // lambda_1 lambda_2
  double gauss_intrinsic = 0.0;
  double ambient_sectional = 0.0;
  double tangency_residual = 0.0;
  double tangency_angle = 0.0;
  double omega_sharp_norm2 = 0.0;
  AmbientPointGeometry ambient;
  SurfaceJets jets;

  Vec3 to_ambient(const Vec2& c) const { return c[0] * tangent_basis[0] + c[1] * tangent_basis[1]; }
  double g(const Vec2& a, const Vec2& b) const { return bilinear(induced_metric, a, b); }
  // omega of a tangent vector; omega(d_i X) = d_i (sigma o X).
  double omega_of(const Vec2& c) const { return c[0] * jets.s.d(0) + c[1] * jets.s.d(1); }
  double omega_normal() const { return ambient.omega_of(normal); }
  Vec2 apply_a(const Vec2& c) const { return shape_operator * c; }
  double gauss_residual() const { return gauss_intrinsic - (ambient_sectional + extrinsic_gauss); }

  // Chart components of the gradient g^ij d_j phi.
  Vec2 gradient(const ChartJet& phi) const { return metric_inverse * Vec2{phi.d(0), phi.d(1)}; }

  // Covariant Hessian d_i d_j phi - Gamma^k_ij d_k phi.
  Mat2 hessian(const ChartJet& phi) const {
    require(phi.order() >= 2, "Hessian needs an order-2 scalar jet");
    Mat2 r{};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        MultiIndex<2> m{};
        ++m[i];
        ++m[j];
        r[i][j] = phi.derivative(m) - jets.gamma[0][i][j].value() * phi.d(0) - jets.gamma[1][i][j].value() * phi.d(1);
      }
    return r;
  }

  // (1/sqrt g) d_i (sqrt g g^ij d_j phi)
  double laplacian(const ChartJet& phi) const {
    require(phi.order() >= 2, "Laplacian needs an order-2 scalar jet");
    require(jets.order >= 2, "Laplacian needs immersion jets of order 2");
    const ChartJet p0 = phi.partial(0), p1 = phi.partial(1);
    double r = 0.0;
    for (int i = 0; i < 2; ++i) {
      const ChartJet flux = jets.sqrt_g * (jets.ginv[i][0] * p0 + jets.ginv[i][1] * p1);
      r += flux.d(i);
    }
    return r / jets.sqrt_g.value();
  }

  // (1/sqrt g) d_i (sqrt g V^i) for a tangent field in chart components.
  double divergence(const std::array<ChartJet, 2>& field) const {
    require(field[0].order() >= 1 && field[1].order() >= 1, "divergence needs order-1 field jets");
    return ((jets.sqrt_g * field[0]).d(0) + (jets.sqrt_g * field[1]).d(1)) / jets.sqrt_g.value();
  }

  // (nabla V)^i_k = d_k V^i + Gamma^i_kl V^l, so nabla_{d_k} V = (nabla V)^i_k d_i.
  Mat2 covariant_derivative(const std::array<ChartJet, 2>& field) const {
    require(field[0].order() >= 1 && field[1].order() >= 1, "covariant derivative needs order-1 field jets");
    Mat2 r{};
    for (int i = 0; i < 2; ++i)
      for (int k = 0; k < 2; ++k) {
        double s = field[i].d(k);
        for (int l = 0; l < 2; ++l) s += jets.gamma[i][k][l].value() * field[l].value();
        r[i][k] = s;
      }
    return r;
  }

  // Surface divergence of the full ambient field omega_sharp: sum_i g~(nabla~_{e_i} omega_sharp, e_i).
  double frame_divergence_omega_sharp() const {
    double r = 0.0;
    for (const auto& e : principal_directions) r += ambient.g(ambient.nabla_omega_sharp(e), e);
    return r;
  }
  // Ambient divergence: surface part plus g~(nabla~_N omega_sharp, N).
  double ambient_divergence_omega_sharp() const {
    return frame_divergence_omega_sharp() + ambient.g(ambient.nabla_omega_sharp(normal), normal);
  }
  // Chart components of the tangential part of omega_sharp.
  Vec2 omega_sharp_tangential() const { return metric_inverse * Vec2{jets.s.d(0), jets.s.d(1)}; }

 private:
  static void require(bool ok, const char* what) {
    if (!ok) throw OrderError(what);
  }
};

namespace detail {

template <class T>
T det3(const std::array<std::array<T, 3>, 3>& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

// Gaussian curvature from E, F, G and their first and second derivatives.
inline ChartJet brioschi(const ChartJet& E, const ChartJet& F, const ChartJet& G) {
  const ChartJet Eu = E.partial(0), Ev = E.partial(1), Fu = F.partial(0), Fv = F.partial(1);
  const ChartJet Gu = G.partial(0), Gv = G.partial(1);
  const ChartJet Evv = Ev.partial(1), Fuv = Fu.partial(1), Guu = Gu.partial(0);
  const int o = Evv.order();
  const ChartJet e = E.truncated(o), f = F.truncated(o), g = G.truncated(o);
  const std::array<std::array<ChartJet, 3>, 3> m1{{{-0.5 * Evv + Fuv - 0.5 * Guu, 0.5 * Eu, Fu - 0.5 * Ev},
                                                   {Fv - 0.5 * Gu, e, f},
                                                   {0.5 * Gv, f, g}}};
  const std::array<std::array<ChartJet, 3>, 3> m2{
      {{ChartJet(o, 0.0), 0.5 * Ev, 0.5 * Gu}, {0.5 * Ev, e, f}, {0.5 * Gu, f, g}}};
  const ChartJet d = e * g - f * f;
  return (det3(m1) - det3(m2)) / (d * d);
}

inline constexpr double kUmbilicGap = 1e-9;
inline constexpr double kMinGram = 1e-10;

}  // namespace detail

// Geometry at one chart point from immersion jets of the given order (>= 2).
inline SurfacePointGeometry surface_from_jets(const ChartVec3& x, const ConformalFactor& factor, const Vec2& uv,
                                              int chart_sign) {
  const int p = std::min({x[0].order(), x[1].order(), x[2].order()});
  if (p < 2) throw OrderError("surface geometry needs immersion jets of order 2");
  SurfacePointGeometry sp;
  SurfaceJets& J = sp.jets;
  J.order = p;
  J.x = x;
  for (int a = 0; a < 2; ++a)
    for (int k = 0; k < 3; ++k) J.dx[a][k] = x[k].partial(a);

  const Vec3 x0{x[0].value(), x[1].value(), x[2].value()};
  const AmbientJet sig = factor.sigma_jet(x0, std::max(p - 1, 2));
  sp.ambient = ambient_from_jet(x0, sig);
  {
    const JetComposer<3, 2> comp(x, p - 1);
    J.s = comp.compose(sig);
    for (int k = 0; k < 3; ++k) J.w[k] = comp.compose(sig.partial(k));
    if (p >= 3)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) J.hess[k][l] = comp.compose(sig.partial(k).partial(l));
  }

  const ChartJet es = exp(J.s);
  for (int i = 0; i < 2; ++i)
    for (int j = i; j < 2; ++j) {
      J.e0[i][j] = dot(J.dx[i], J.dx[j]);
      J.e0[j][i] = J.e0[i][j];
      J.g[i][j] = es * J.e0[i][j];
      J.g[j][i] = J.g[i][j];
    }
  const ChartJet detg = J.g[0][0] * J.g[1][1] - J.g[0][1] * J.g[1][0];
  if (!(detg.value() > detail::kMinGram))
    throw RegularityError("degenerate tangent basis at (u, v) = (" + std::to_string(uv[0]) + ", " +
                          std::to_string(uv[1]) + ")");
  const ChartJet inv_det = reciprocal(detg);
  J.ginv = {{{J.g[1][1] * inv_det, -1.0 * J.g[0][1] * inv_det}, {-1.0 * J.g[1][0] * inv_det, J.g[0][0] * inv_det}}};
  J.sqrt_g = sqrt(detg);

  const ChartVec3 nn = cross(J.dx[0], J.dx[1]);
  // |n|_g~ = e^{s/2} |n|
  const ChartJet inv_len = static_cast<double>(chart_sign) * reciprocal(sqrt(dot(nn, nn)) * exp(0.5 * J.s));
  J.n = scaled(nn, inv_len);

  const ChartJet wn = dot(J.w, J.n);  // omega(N), order p-2
  for (int i = 0; i < 2; ++i)
    for (int j = i; j < 2; ++j) {
      ChartVec3 xij;
      for (int k = 0; k < 3; ++k) xij[k] = J.dx[i][k].partial(j);
      J.h[i][j] = es * (dot(xij, J.n) - 0.5 * J.e0[i][j] * wn);
      J.h[j][i] = J.h[i][j];
    }
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) J.a[i][j] = J.ginv[i][0] * J.h[0][j] + J.ginv[i][1] * J.h[1][j];
  J.H = 0.5 * (J.a[0][0] + J.a[1][1]);
  J.Kext = J.a[0][0] * J.a[1][1] - J.a[0][1] * J.a[1][0];

  std::array<JetMat2, 2> dg;  // dg[l][i][j] = d_l g_ij
  for (int l = 0; l < 2; ++l)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) dg[l][i][j] = J.g[i][j].partial(l);
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        ChartJet acc(p - 2, 0.0);
        for (int l = 0; l < 2; ++l) acc += J.ginv[k][l] * (dg[i][l][j] + dg[j][l][i] - dg[l][i][j]);
        J.gamma[k][i][j] = 0.5 * acc;
      }
  if (p >= 3) J.K = detail::brioschi(J.g[0][0], J.g[0][1], J.g[1][1]);

  // Point values.
  sp.chart_point = uv;
  sp.position = x0;
  for (int a = 0; a < 2; ++a)
    for (int k = 0; k < 3; ++k) sp.tangent_basis[a][k] = J.dx[a][k].value();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      sp.induced_metric[i][j] = J.g[i][j].value();
      sp.metric_inverse[i][j] = J.ginv[i][j].value();
      sp.shape_operator[i][j] = J.a[i][j].value();
    }
  sp.area_density = J.sqrt_g.value();
  for (int k = 0; k < 3; ++k) sp.normal[k] = J.n[k].value();
  sp.mean_curvature = J.H.value();
  sp.extrinsic_gauss = J.Kext.value();
  sp.gauss_intrinsic = J.K ? J.K->value() : std::nan("");

  const Mat2& A = sp.shape_operator;
  const Mat2& G = sp.induced_metric;
  // Half-gap from the traceless part S = A - H: tr S^2 = 2 disc^2. Unlike
  // sqrt(H^2 - K) this keeps round-off quadratic at umbilics.
  const double s00 = A[0][0] - sp.mean_curvature, s11 = A[1][1] - sp.mean_curvature;
  const double disc = std::sqrt(std::max(0.0, 0.5 * (s00 * s00 + s11 * s11) + A[0][1] * A[1][0]));
  sp.principal_curvatures = {sp.mean_curvature + disc, sp.mean_curvature - disc};
  auto unit = [&](Vec2 c) {
    const double l = std::sqrt(sp.g(c, c));
    return Vec2{c[0] / l, c[1] / l};
  };
  sp.umbilic = sp.principal_curvatures[0] - sp.principal_curvatures[1] < detail::kUmbilicGap;
  Vec2 e1;
  if (sp.umbilic) {
    e1 = unit({1.0, 0.0});
  } else {
    const double l1 = sp.principal_curvatures[0];
    const Vec2 r0{A[0][1], l1 - A[0][0]}, r1{l1 - A[1][1], A[1][0]};
    e1 = unit(std::hypot(r0[0], r0[1]) >= std::hypot(r1[0], r1[1]) ? r0 : r1);
  }
  // Rotate by a quarter turn in the induced metric: the image of G e1 under J.
  const Vec2 ge1 = G * e1;
  const double rd = std::sqrt(det(G));
  const Vec2 e2{-ge1[1] / rd, ge1[0] / rd};
  sp.principal_chart = {e1, e2};
  sp.principal_directions = {sp.to_ambient(e1), sp.to_ambient(e2)};
  sp.ambient_sectional = sp.ambient.sectional(sp.principal_directions[0], sp.principal_directions[1]);

  sp.omega_sharp_norm2 = sp.ambient.omega_sharp_norm2();
  sp.tangency_residual = std::abs(sp.omega_normal());
  sp.tangency_angle = std::atan2(std::abs(sp.omega_of(e2)), std::abs(sp.omega_of(e1)));
  return sp;
}

inline SurfacePointGeometry surface_at(const ClosedSurface& surface, const ConformalFactor& factor, const Vec2& uv,
                                       int order = 3) {
  return surface_from_jets(surface.chart_jets(uv, order), factor, uv, surface.chart_sign());
}

inline Mat2 shape_operator(const ClosedSurface& surface, const ConformalFactor& factor, const Vec2& uv) {
  return surface_at(surface, factor, uv, 2).shape_operator;
}

// Chart jet of a scalar over (u, v, x, y, z) along the immersion.
inline ChartJet chart_scalar(const FieldExpr& f, const Vec2& uv, const ChartVec3& x, int order) {
  if (f.variables() == chart_variables()) return jet_eval<2>(f, uv, order);
  if (f.variables() != surface_variables()) throw ArityError("chart scalars must use variables (u, v, x, y, z)");
  const std::array<ChartJet, 5> vals{ChartJet::variable(0, uv[0], order), ChartJet::variable(1, uv[1], order),
                                     x[0].truncated(order), x[1].truncated(order), x[2].truncated(order)};
  return f.eval<ChartJet>(std::span<const ChartJet>(vals));
}

// Tangent field obtained by g~-orthogonal projection of an ambient field V(x, y, z):
// X^i = g^ij g~(V, d_j X), returned as chart jets of order p - 1.
inline std::array<ChartJet, 2> project_tangent(const SurfacePointGeometry& sp, const std::array<FieldExpr, 3>& field) {
  const SurfaceJets& J = sp.jets;
  const int o = J.order - 1;
  ChartVec3 xo{J.x[0].truncated(o), J.x[1].truncated(o), J.x[2].truncated(o)};
  ChartVec3 vj;
  for (int k = 0; k < 3; ++k) {
    if (field[k].variables() != ambient_variables()) throw ArityError("tangent fields are ambient expressions in (x, y, z)");
    vj[k] = field[k].eval<ChartJet>(std::span<const ChartJet>(xo));
  }
  const ChartJet es = exp(J.s);
  const std::array<ChartJet, 2> low{es * dot(vj, J.dx[0]), es * dot(vj, J.dx[1])};
  return {J.ginv[0][0] * low[0] + J.ginv[0][1] * low[1], J.ginv[1][0] * low[0] + J.ginv[1][1] * low[1]};
}

// |g~((nabla_X A)Y - (nabla_Y A)X, Z) - (omega(AY) g~(X,Z) - omega(AX) g~(Y,Z)) / 2|
// for chart vectors X, Y, Z; nabla is the induced connection.
inline double codazzi_residual(const SurfacePointGeometry& sp, const Vec2& X, const Vec2& Y, const Vec2& Z) {
  const SurfaceJets& J = sp.jets;
  if (J.order < 3) throw OrderError("Codazzi residual needs immersion jets of order 3");
  // (nabla_k A)^i_j = d_k A^i_j + Gamma^i_kl A^l_j - Gamma^l_kj A^i_l
  auto nabla_a = [&](int k, int i, int j) {
    double r = J.a[i][j].d(k);
    for (int l = 0; l < 2; ++l) r += J.gamma[i][k][l].value() * J.a[l][j].value() - J.gamma[l][k][j].value() * J.a[i][l].value();
    return r;
  };
  Vec2 lhs{};
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k)
      for (int j = 0; j < 2; ++j) lhs[i] += nabla_a(k, i, j) * (X[k] * Y[j] - Y[k] * X[j]);
  const double rhs = 0.5 * (sp.omega_of(sp.apply_a(Y)) * sp.g(X, Z) - sp.omega_of(sp.apply_a(X)) * sp.g(Y, Z));
  return std::abs(sp.g(lhs, Z) - rhs);
}

// Same left side against the general Codazzi equation -g~(R~(X,Y)N, Z), valid without tangency.
inline double codazzi_general_residual(const SurfacePointGeometry& sp, const Vec2& X, const Vec2& Y, const Vec2& Z) {
  const SurfaceJets& J = sp.jets;
  if (J.order < 3) throw OrderError("Codazzi residual needs immersion jets of order 3");
  Vec2 lhs{};
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k)
      for (int j = 0; j < 2; ++j) {
        double r = J.a[i][j].d(k);
        for (int l = 0; l < 2; ++l)
          r += J.gamma[i][k][l].value() * J.a[l][j].value() - J.gamma[l][k][j].value() * J.a[i][l].value();
        lhs[i] += r * (X[k] * Y[j] - Y[k] * X[j]);
      }
  const Vec3 rn = sp.ambient.curvature(sp.to_ambient(X), sp.to_ambient(Y), sp.normal);
  return std::abs(sp.g(lhs, Z) + sp.ambient.g(rn, sp.to_ambient(Z)));
}

inline double surface_laplacian(const SurfacePointGeometry& sp, const ChartJet& scalar) { return sp.laplacian(scalar); }
inline double surface_divergence(const SurfacePointGeometry& sp, const std::array<ChartJet, 2>& field) {
  return sp.divergence(field);
}

}  // namespace csl
