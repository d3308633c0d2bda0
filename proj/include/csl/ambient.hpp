#pragma once

// Geometry of the conformally flat ambient space (R^3, e^sigma <,>).
//
// Coordinates are Cartesian. Curvature follows
//   R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z,
// stored as riemann[i][j][k][l] = l-th component of R(d_i, d_j) d_k.

#include <array>
#include <cmath>
#include <string>

#include "csl/expr.hpp"
#include "csl/jet.hpp"
#include "csl/linalg.hpp"

namespace csl {

using Christoffel = std::array<std::array<std::array<double, 3>, 3>, 3>;  // [k][i][j] = Gamma^k_ij
using Riemann = std::array<std::array<std::array<std::array<double, 3>, 3>, 3>, 3>;

struct ConformalFactor {
  std::string name = "flat";
  FieldExpr sigma = FieldExpr::constant(0.0, ambient_variables());
  bool harmonic_intent = false;
  std::string validity_note;
  std::string source;  // original spec text, echoed in reports

  bool is_flat() const { return sigma.is_zero_constant(); }

  AmbientJet sigma_jet(const Vec3& p, int order) const { return jet_eval<3>(sigma, p, order); }
};

inline ConformalFactor flat_factor() { return {}; }

inline ConformalFactor factor_from_sigma(const std::string& text, bool harmonic_intent = false,
                                         std::string name = "expr") {
  ConformalFactor f;
  f.name = std::move(name);
  f.sigma = parse_field(text, ambient_variables());
  f.harmonic_intent = harmonic_intent;
  f.source = text;
  return f;
}

// sigma = 2 ln h. With h Euclidean-harmonic this is harmonic for the conformal
// metric itself, because in three dimensions
//   Delta_g sigma = e^{-sigma} (Delta sigma + |grad sigma|^2 / 2) = 2 e^{-sigma} Delta h / h.
inline ConformalFactor harmonic_factor_from_potential(const FieldExpr& h, std::string name = "harmonic_potential") {
  ConformalFactor f;
  f.name = std::move(name);
  f.sigma = FieldExpr(expr::mul(expr::num(2.0), expr::call(Func::ln, h.root())), h.variables());
  f.harmonic_intent = true;
  f.validity_note = "requires h = " + h.to_string() + " > 0";
  f.source = "2*ln(" + h.to_string() + ")";
  // The flat factor stays recognisable when h is the constant 1.
  if (h.is_constant() && h.root()->value == 1.0) f.sigma = FieldExpr::constant(0.0, ambient_variables());
  return f;
}

struct AmbientPointGeometry {
  Vec3 point{};
  AmbientJet sigma_jet;
  double sigma = 0.0;
  Vec3 omega{};        // d sigma
  Vec3 omega_sharp{};  // e^{-sigma} grad sigma
  Mat3 hessian{};      // flat Hessian d_i d_j sigma
  Mat3 metric{};
  Christoffel christoffels{};
  Riemann riemann{};
  Mat3 ricci{};
  Mat3 b_tensor{};
  Mat3 grad_omega_sharp{};  // [i][l] = (nabla_{d_i} omega_sharp)^l
  double harmonic_residual = 0.0;

  double conformal() const { return std::exp(sigma); }
  double g(const Vec3& a, const Vec3& b) const { return std::exp(sigma) * dot(a, b); }
  double omega_of(const Vec3& a) const { return dot(omega, a); }
  double omega_sharp_norm2() const { return std::exp(-sigma) * dot(omega, omega); }

  Vec3 curvature(const Vec3& x, const Vec3& y, const Vec3& z) const {
    Vec3 r{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
          const double c = x[i] * y[j] * z[k];
          if (c == 0.0) continue;
          for (int l = 0; l < 3; ++l) r[l] += c * riemann[i][j][k][l];
        }
    return r;
  }
  // g(R(x,y)y, x) / (g(x,x) g(y,y) - g(x,y)^2)
  double sectional(const Vec3& x, const Vec3& y) const {
    const double gxy = g(x, y);
    return g(curvature(x, y, y), x) / (g(x, x) * g(y, y) - gxy * gxy);
  }
  double ricci_of(const Vec3& a, const Vec3& b) const { return form(ricci, a, b); }
  double b_of(const Vec3& a, const Vec3& b) const { return form(b_tensor, a, b); }
  double hessian_of(const Vec3& a, const Vec3& b) const { return form(hessian, a, b); }
  Vec3 nabla_omega_sharp(const Vec3& a) const {
    Vec3 r{};
    for (int i = 0; i < 3; ++i)
      for (int l = 0; l < 3; ++l) r[l] += a[i] * grad_omega_sharp[i][l];
    return r;
  }

 private:
  static double form(const Mat3& m, const Vec3& a, const Vec3& b) {
    double r = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r += a[i] * m[i][j] * b[j];
    return r;
  }
};

namespace detail {

inline double kron(int a, int b) { return a == b ? 1.0 : 0.0; }

// Christoffel symbols from the conformal connection formula
//   Gamma(X,Y) = (omega(X) Y + omega(Y) X - g(X,Y) omega_sharp) / 2.
inline Christoffel conformal_christoffels(const Vec3& omega) {
  Christoffel c{};
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        c[k][i][j] = 0.5 * (kron(k, i) * omega[j] + kron(k, j) * omega[i] - kron(i, j) * omega[k]);
  return c;
}

// Riemann tensor of g = e^sigma delta through the generic metric route:
// metric derivatives, Christoffels and their derivatives by the textbook
// formulas, then dGamma + Gamma Gamma. Nothing here relies on the metric
// being conformally flat.
inline Riemann riemann_from_metric(const AmbientJet& sigma) {
  if (sigma.order() < 2) throw OrderError("direct curvature needs an order-2 jet of sigma");
  using T3 = std::array<Mat3, 3>;
  const double e = std::exp(sigma.value());
  Vec3 w;
  Mat3 hs;
  for (int i = 0; i < 3; ++i) {
    w[i] = sigma.d(i);
    for (int j = 0; j < 3; ++j) {
      MultiIndex<3> m{};
      ++m[i];
      ++m[j];
      hs[i][j] = sigma.derivative(m);
    }
  }
  Mat3 g{}, ginv{};
  T3 dg{};                     // dg[m][i][j] = d_m g_ij
  std::array<T3, 3> ddg{};     // ddg[m][n][i][j] = d_m d_n g_ij
  for (int i = 0; i < 3; ++i) {
    g[i][i] = e;
    for (int m = 0; m < 3; ++m) {
      dg[m][i][i] = e * w[m];
      for (int n = 0; n < 3; ++n) ddg[m][n][i][i] = e * (hs[m][n] + w[m] * w[n]);
    }
  }
  const double det = g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1]) -
                     g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0]) +
                     g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const int a0 = (j + 1) % 3, a1 = (j + 2) % 3, b0 = (i + 1) % 3, b1 = (i + 2) % 3;
      ginv[i][j] = (g[a0][b0] * g[a1][b1] - g[a0][b1] * g[a1][b0]) / det;
    }
  T3 dginv{};  // d_m g^kl = -g^ka d_m g_ab g^bl
  for (int m = 0; m < 3; ++m)
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 3; ++l) {
        double s = 0.0;
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) s -= ginv[k][a] * dg[m][a][b] * ginv[b][l];
        dginv[m][k][l] = s;
      }
  T3 gam{};                  // [k][i][j]
  std::array<T3, 3> dgam{};  // [m][k][i][j] = d_m Gamma^k_ij
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double c = 0.0;
        std::array<double, 3> dc{};
        for (int l = 0; l < 3; ++l) {
          const double first = dg[i][l][j] + dg[j][l][i] - dg[l][i][j];
          c += ginv[k][l] * first;
          for (int m = 0; m < 3; ++m)
            dc[m] += dginv[m][k][l] * first + ginv[k][l] * (ddg[m][i][l][j] + ddg[m][j][l][i] - ddg[m][l][i][j]);
        }
        gam[k][i][j] = 0.5 * c;
        for (int m = 0; m < 3; ++m) dgam[m][k][i][j] = 0.5 * dc[m];
      }
  Riemann r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          double v = dgam[i][l][j][k] - dgam[j][l][i][k];
          for (int m = 0; m < 3; ++m) v += gam[l][i][m] * gam[m][j][k] - gam[l][j][m] * gam[m][i][k];
          r[i][j][k][l] = v;
        }
  return r;
}

}  // namespace detail

// Sign applied to the (g(Y,Z) omega(X) - g(X,Z) omega(Y)) omega_sharp / 4 term of
// the conformal curvature transformation. `corrected` (-1) reproduces the
// Christoffel curvature; `as_printed` (+1) keeps the published sign so its
// discrepancy can be reported.
enum class QuarticSign { corrected, as_printed };

namespace detail {

inline Riemann riemann_from_transform(const AmbientPointGeometry& a, QuarticSign sign) {
  const double s = sign == QuarticSign::corrected ? -0.25 : 0.25;
  Riemann r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l)
          r[i][j][k][l] = 0.5 * (a.b_tensor[i][k] * kron(j, l) - a.b_tensor[j][k] * kron(i, l) +
                                 a.metric[i][k] * a.grad_omega_sharp[j][l] - a.metric[j][k] * a.grad_omega_sharp[i][l]) +
                          s * (a.metric[j][k] * a.omega[i] - a.metric[i][k] * a.omega[j]) * a.omega_sharp[l];
  return r;
}

}  // namespace detail

inline AmbientPointGeometry ambient_from_jet(const Vec3& point, const AmbientJet& sigma_jet) {
  if (sigma_jet.order() < 2) throw OrderError("ambient geometry needs an order-2 jet of sigma");
  AmbientPointGeometry a;
  a.point = point;
  a.sigma_jet = sigma_jet;
  a.sigma = sigma_jet.value();
  const double e = std::exp(a.sigma), einv = std::exp(-a.sigma);
  for (int i = 0; i < 3; ++i) {
    a.omega[i] = sigma_jet.d(i);
    a.omega_sharp[i] = einv * a.omega[i];
    for (int j = 0; j < 3; ++j) {
      MultiIndex<3> m{};
      ++m[i];
      ++m[j];
      a.hessian[i][j] = sigma_jet.derivative(m);
      a.metric[i][j] = detail::kron(i, j) * e;
    }
  }
  a.christoffels = detail::conformal_christoffels(a.omega);
  const double w2 = dot(a.omega, a.omega);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      a.b_tensor[i][j] = a.hessian[i][j] - 0.5 * a.omega[i] * a.omega[j];
      // d_i(e^{-sigma} d_l sigma) + Gamma^l_im omega_sharp^m, simplified.
      a.grad_omega_sharp[i][j] = einv * (a.hessian[i][j] - a.omega[i] * a.omega[j] + 0.5 * detail::kron(i, j) * w2);
    }
  double lap = 0.0;
  for (int i = 0; i < 3; ++i) {
    lap += a.hessian[i][i];
    for (int k = 0; k < 3; ++k) lap -= a.christoffels[k][i][i] * a.omega[k];
  }
  a.harmonic_residual = einv * lap;
  a.riemann = detail::riemann_from_metric(sigma_jet);
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k) {
      double s = 0.0;
      for (int i = 0; i < 3; ++i) s += a.riemann[i][j][k][i];
      a.ricci[j][k] = s;
    }
  return a;
}

inline AmbientPointGeometry ambient_at(const ConformalFactor& factor, const Vec3& point, int order = 3) {
  return ambient_from_jet(point, factor.sigma_jet(point, order));
}

inline Riemann curvature_direct(const ConformalFactor& factor, const Vec3& point) {
  return detail::riemann_from_metric(factor.sigma_jet(point, 3));
}

inline Riemann curvature_via_transform(const ConformalFactor& factor, const Vec3& point,
                                       QuarticSign sign = QuarticSign::corrected) {
  return detail::riemann_from_transform(ambient_at(factor, point), sign);
}

inline double harmonicity_residual(const ConformalFactor& factor, const Vec3& point) {
  return ambient_at(factor, point, 2).harmonic_residual;
}

// Largest |a - b| over components, and the largest |b|.
inline std::pair<double, double> max_difference(const Riemann& a, const Riemann& b) {
  double diff = 0.0, scale = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          diff = std::max(diff, std::abs(a[i][j][k][l] - b[i][j][k][l]));
          scale = std::max(scale, std::abs(b[i][j][k][l]));
        }
  return {diff, scale};
}

}  // namespace csl
