#pragma once

// Named surfaces and conformal factors. Every entry is built from
// expression text, so the same objects can be declared in a config file.

#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "csl/ambient.hpp"
#include "csl/surface.hpp"

namespace csl {

namespace detail {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  return v < 0 ? "(" + s + ")" : s;
}

inline std::shared_ptr<const ImmersionSource> immersion(const std::string& x, const std::string& y,
                                                        const std::string& z) {
  const auto& vars = chart_variables();
  return std::make_shared<ExprImmersion>(
      std::array<FieldExpr, 3>{parse_field(x, vars), parse_field(y, vars), parse_field(z, vars)});
}

inline ChartDomain latitude_domain() { return {{0.0, 2 * std::numbers::pi}, {0.0, std::numbers::pi}}; }
inline ChartDomain periodic_domain() { return {{0.0, 2 * std::numbers::pi}, {0.0, 2 * std::numbers::pi}}; }

}  // namespace detail

// Latitude-longitude chart: v is the polar angle in (0, pi).
inline ClosedSurface make_sphere(double r, const Vec3& c = {0, 0, 0}, Orientation o = Orientation::inward) {
  using detail::num;
  return {"sphere", Topology::sphere_like,
          detail::immersion(num(c[0]) + "+" + num(r) + "*sin(v)*cos(u)", num(c[1]) + "+" + num(r) + "*sin(v)*sin(u)",
                            num(c[2]) + "+" + num(r) + "*cos(v)"),
          detail::latitude_domain(), o};
}

inline ClosedSurface make_ellipsoid(double a, double b, double c, Orientation o = Orientation::inward) {
  using detail::num;
  return {"ellipsoid", Topology::sphere_like,
          detail::immersion(num(a) + "*sin(v)*cos(u)", num(b) + "*sin(v)*sin(u)", num(c) + "*cos(v)"),
          detail::latitude_domain(), o};
}

// Radius r (1 + eps cos(m u) sin(v)^p).
inline ClosedSurface make_perturbed_sphere(double r, double eps, int m, int p, Orientation o = Orientation::inward) {
  using detail::num;
  const std::string rho =
      "(" + num(r) + "*(1+" + num(eps) + "*cos(" + std::to_string(m) + "*u)*sin(v)^" + std::to_string(p) + "))";
  return {"perturbed_sphere", Topology::sphere_like,
          detail::immersion(rho + "*sin(v)*cos(u)", rho + "*sin(v)*sin(u)", rho + "*cos(v)"), detail::latitude_domain(),
          o};
}

// Tube of radius r around the circle of radius R in the xy-plane; u is the
// longitude, v the meridian angle.
inline ClosedSurface make_torus(double R, double r, Orientation o = Orientation::inward) {
  using detail::num;
  const std::string rho = "(" + num(R) + "+" + num(r) + "*cos(v))";
  return {"torus", Topology::torus_like,
          detail::immersion(rho + "*cos(u)", rho + "*sin(u)", num(r) + "*sin(v)"), detail::periodic_domain(), o};
}

inline ClosedSurface make_clifford_torus(double r = 1.0, Orientation o = Orientation::inward) {
  auto s = make_torus(std::numbers::sqrt2 * r, r, o);
  return {"clifford_torus", s.topology(), s.source_ptr(), s.domain(), o};
}

// Torus displaced by eps cos(mu u) cos(mv v) along its Euclidean unit normal.
inline ClosedSurface make_perturbed_torus(double R, double r, double eps, int mu = 2, int mv = 1,
                                          Orientation o = Orientation::inward) {
  using detail::num;
  const std::string bump = "(" + num(eps) + "*cos(" + std::to_string(mu) + "*u)*cos(" + std::to_string(mv) + "*v))";
  const std::string rho = "(" + num(R) + "+(" + num(r) + "+" + bump + ")*cos(v))";
  return {"perturbed_torus", Topology::torus_like,
          detail::immersion(rho + "*cos(u)", rho + "*sin(u)", "(" + num(r) + "+" + bump + ")*sin(v)"),
          detail::periodic_domain(), o};
}

inline ClosedSurface make_custom(Topology t, const std::string& x, const std::string& y, const std::string& z,
                                 std::optional<ChartDomain> domain = std::nullopt, Orientation o = Orientation::inward) {
  const ChartDomain d = domain ? *domain : (t == Topology::sphere_like ? detail::latitude_domain() : detail::periodic_domain());
  return {"custom", t, detail::immersion(x, y, z), d, o};
}

// ---------------------------------------------------------------------------
// Conformal factors.

// h = 1 + a x, harmonic generator.
inline ConformalFactor linear_harmonic_factor(double a) {
  auto f = harmonic_factor_from_potential(parse_field("1+" + detail::num(a) + "*x", ambient_variables()),
                                          "linear_harmonic");
  f.validity_note = "requires 1+" + detail::num(a) + "*x > 0";
  return f;
}

// h = 1 + q / |x - p|, harmonic away from p.
inline ConformalFactor point_source_factor(double q = 1.0, const Vec3& p = {3, 0, 0}) {
  using detail::num;
  auto f = harmonic_factor_from_potential(
      parse_field("1+" + num(q) + "/sqrt((x-" + num(p[0]) + ")^2+(y-" + num(p[1]) + ")^2+(z-" + num(p[2]) + ")^2)",
                  ambient_variables()),
      "point_source");
  f.validity_note = "singular at (" + num(p[0]) + ", " + num(p[1]) + ", " + num(p[2]) + ")";
  return f;
}

// sigma = A cos(theta), theta the azimuth about the z-axis. Tangent to every
// surface of revolution about that axis; not harmonic.
inline ConformalFactor azimuthal_factor(double A) {
  auto f = factor_from_sigma(detail::num(A) + "*x/sqrt(x^2+y^2)", false, "azimuthal");
  f.validity_note = "singular on the z-axis";
  return f;
}

struct CatalogEntry {
  std::string name;
  std::string parameters;
  std::string description;
};

inline std::vector<CatalogEntry> surface_catalog() {
  return {
      {"sphere", "r: number = 1, center: [x, y, z] = [0, 0, 0]", "round sphere, latitude-longitude chart"},
      {"ellipsoid", "a, b, c: numbers", "axis-aligned ellipsoid"},
      {"perturbed_sphere", "r, eps: numbers, mode: {m: int, p: int}", "radius r (1 + eps cos(m u) sin^p v)"},
      {"torus", "R, r: numbers", "torus of revolution about the z-axis"},
      {"clifford_torus", "r: number = 1", "torus with R = sqrt(2) r"},
      {"perturbed_torus", "R, r, eps: numbers, mode: {mu: int, mv: int}",
       "torus displaced by eps cos(mu u) cos(mv v) along its Euclidean normal"},
      {"custom", "topology: sphere_like|torus_like, x, y, z: expressions in (u, v), domain: [[u0, u1], [v0, v1]]",
       "user immersion"},
  };
}

inline std::vector<CatalogEntry> factor_catalog() {
  return {
      {"flat", "", "sigma = 0"},
      {"expr", "sigma: expression in (x, y, z), harmonic_intent: bool = false", "arbitrary conformal factor"},
      {"harmonic_potential", "h: expression in (x, y, z)", "sigma = 2 ln h, harmonic when h is Euclidean-harmonic"},
      {"linear_harmonic", "a: number", "sigma = 2 ln(1 + a x)"},
      {"point_source", "q: number = 1, p: [x, y, z] = [3, 0, 0]", "sigma = 2 ln(1 + q / |x - p|)"},
      {"azimuthal", "A: number", "sigma = A cos(azimuth), tangent to surfaces of revolution"},
  };
}

}  // namespace csl
