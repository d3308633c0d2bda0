#pragma once

// Bandlimited surfaces. torus_like: every Cartesian component is a real
// double-Fourier series. sphere_like: radial graph rho(u, v) over the round
// sphere, expanded in real spherical harmonics.
// Derivatives come from differentiating the basis, so any chart jet order
// is exact up to the truncation of the series itself.

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "csl/errors.hpp"
#include "csl/jet.hpp"
#include "csl/linalg.hpp"
#include "csl/quadrature.hpp"
#include "csl/surface.hpp"

namespace csl {

// How a sphere_like radius is expanded in v. harmonic: real spherical
// harmonics up to degree mv, smooth at the poles whatever the coefficients.
// latitude_legendre: Legendre polynomials in 2v/pi - 1 up to degree 2 mv; it
// also resolves radii that are smooth in (u, v) but not at the poles, at the
// price of amplifying coefficient noise near them in high derivatives.
enum class SphereBasis { harmonic, latitude_legendre };

struct Bandlimit {
  int mu = 12;
  int mv = 12;
  SphereBasis sphere = SphereBasis::harmonic;
};

namespace detail {

// d^k/du^k of the real Fourier function with signed index a:
// cos(a u) for a >= 0, sin(|a| u) for a < 0.
inline void fourier_derivatives(int a, double u, int order, double* out) {
  const int m = std::abs(a);
  const double phase = a >= 0 ? m * u : m * u - 0.5 * std::numbers::pi;
  double scale = 1.0;
  for (int k = 0; k <= order; ++k) {
    out[k] = scale * std::cos(phase + 0.5 * std::numbers::pi * k);
    scale *= m;
  }
}

// p[n][k] = P_n^(k)(xi) for n <= degree, k <= order.
inline std::vector<std::array<double, kMaxJetOrder + 1>> legendre_derivatives(int degree, double xi, int order) {
  std::vector<std::array<double, kMaxJetOrder + 1>> p(degree + 1);
  for (auto& row : p) row.fill(0.0);
  p[0][0] = 1.0;
  if (degree >= 1) {
    p[1][0] = xi;
    if (order >= 1) p[1][1] = 1.0;
  }
  for (int n = 1; n < degree; ++n)
    for (int k = 0; k <= order; ++k) {
      const double lower = k > 0 ? k * p[n][k - 1] : 0.0;
      p[n + 1][k] = ((2 * n + 1) * (xi * p[n][k] + lower) - n * p[n - 1][k]) / (n + 1);
    }
  return p;
}

// Orthonormal associated Legendre functions of cos v, with their v-derivatives:
// rows[m * (degree + 1) + n][k] = d^k/dv^k Pbar_n^m(cos v), zero for n < m.
// Pbar_n^m carries the factor sin^m v, so every series built on them is
// smooth at the poles.
inline std::vector<std::array<double, kMaxJetOrder + 1>> associated_legendre_rows(int max_order, int degree, double v,
                                                                                 int order) {
  using Series = std::array<double, kMaxJetOrder + 1>;  // Taylor coefficients in v
  auto mul = [order](const Series& a, const Series& b) {
    Series r{};
    for (int i = 0; i <= order; ++i)
      for (int j = 0; i + j <= order; ++j) r[i + j] += a[i] * b[j];
    return r;
  };
  Series x{}, s{};
  double fact = 1.0;
  for (int k = 0; k <= order; ++k) {
    if (k > 0) fact *= k;
    x[k] = std::cos(v + 0.5 * std::numbers::pi * k) / fact;
    s[k] = std::sin(v + 0.5 * std::numbers::pi * k) / fact;
  }
  const int nb = degree + 1;
  std::vector<Series> rows(static_cast<std::size_t>(max_order + 1) * nb, Series{});
  Series pmm{};
  pmm[0] = std::sqrt(0.5);
  for (int m = 0; m <= std::min(max_order, degree); ++m) {
    if (m > 0) {
      pmm = mul(s, pmm);
      for (double& c : pmm) c *= std::sqrt((2.0 * m + 1) / (2.0 * m));
    }
    Series* row = &rows[static_cast<std::size_t>(m) * nb];
    row[m] = pmm;
    if (m + 1 <= degree) {
      row[m + 1] = mul(x, pmm);
      for (double& c : row[m + 1]) c *= std::sqrt(2.0 * m + 3);
    }
    for (int n = m + 2; n <= degree; ++n) {
      const double nn = double(n) * n, mm = double(m) * m;
      const double alpha = std::sqrt((4 * nn - 1) / (nn - mm));
      const double beta = std::sqrt(((n - 1.0) * (n - 1.0) - mm) * (2.0 * n + 1) / ((2.0 * n - 3) * (nn - mm)));
      const Series xp = mul(x, row[n - 1]);
      for (int k = 0; k <= order; ++k) row[n][k] = alpha * xp[k] - beta * row[n - 2][k];
    }
  }
  for (auto& r : rows) {
    double f = 1.0;
    for (int k = 1; k <= order; ++k) r[k] *= (f *= k);
  }
  return rows;
}

inline int collocation_size(int m) {
  const int n = 3 * m + (3 * m) % 2;
  return std::max(n, 2 * m + 2);
}

}  // namespace detail

// Scalar basis on one chart: the collocation grid, the discrete transform and
// jet synthesis. Coefficient index = (a + mu) * nb + b_index. On the torus
// nb = 2 mv + 1 and b_index = b + mv. On the sphere b_index is a degree: the
// harmonic degree n (nb = mv + 1, coefficients for n < |a| pinned to zero) or
// the Legendre degree in 2v/pi - 1 (nb = 2 mv + 1).
class SpectralBasis {
  using Row = std::array<double, kMaxJetOrder + 1>;

 public:
  SpectralBasis(Topology topology, Bandlimit band) : topology_(topology), band_(band) {
    if (band.mu < 0 || band.mv < 0) throw ConfigError("", 0, "bandlimits must be non-negative");
    const bool torus = topology == Topology::torus_like;
    harmonic_ = !torus && band.sphere == SphereBasis::harmonic;
    na_ = 2 * band.mu + 1;
    nb_ = harmonic_ ? band.mv + 1 : 2 * band.mv + 1;
    const int nu = detail::collocation_size(band.mu);
    const int nv = torus || harmonic_ ? detail::collocation_size(band.mv) : 3 * band.mv + 2;
    grid_ = harmonic_ ? harmonic_grid(nu, nv) : make_grid(topology, domain(), nu, nv);
    u_table_.assign(static_cast<std::size_t>(nu) * na_, 0.0);
    for (int i = 0; i < nu; ++i)
      for (int a = -band.mu; a <= band.mu; ++a) {
        double d[1];
        detail::fourier_derivatives(a, grid_.nodes[static_cast<std::size_t>(i) * nv][0], 0, d);
        u_table_[static_cast<std::size_t>(i) * na_ + a + band.mu] = d[0];
      }
    v_table_.assign(static_cast<std::size_t>(nv) * v_stride(), 0.0);
    v_fit_.assign(v_table_.size(), 0.0);
    for (int j = 0; j < nv; ++j) {
      const double v = grid_.nodes[j][1];
      if (torus) {
        for (int b = -band.mv; b <= band.mv; ++b) {
          double d[1];
          detail::fourier_derivatives(b, v, 0, d);
          v_table_[static_cast<std::size_t>(j) * nb_ + b + band.mv] = d[0];
          v_fit_[static_cast<std::size_t>(j) * nb_ + b + band.mv] = (b == 0 ? 1.0 : 2.0) * d[0] / nv;
        }
      } else if (!harmonic_) {
        // Gauss weights on [0, pi] rescaled to [-1, 1].
        const double w = grid_.weights[j] / (2 * std::numbers::pi / nu) * (2.0 / std::numbers::pi);
        const auto p = detail::legendre_derivatives(nb_ - 1, xi(v), 0);
        for (int a = 0; a < na_; ++a)
          for (int n = 0; n < nb_; ++n) {
            v_table_[static_cast<std::size_t>(j) * v_stride() + a * nb_ + n] = p[n][0];
            v_fit_[static_cast<std::size_t>(j) * v_stride() + a * nb_ + n] = 0.5 * (2 * n + 1) * w * p[n][0];
          }
      } else {
        // Gauss weight in cos v, recovered from the area weight du dv.
        const double w = grid_.weights[j] / (2 * std::numbers::pi / nu) * std::sin(v);
        const auto p = detail::associated_legendre_rows(band.mu, band.mv, v, 0);
        for (int a = 0; a < na_; ++a)
          for (int n = 0; n < nb_; ++n) {
            const double y = p[static_cast<std::size_t>(std::abs(a - band.mu)) * nb_ + n][0];
            v_table_[static_cast<std::size_t>(j) * v_stride() + a * nb_ + n] = y;
            v_fit_[static_cast<std::size_t>(j) * v_stride() + a * nb_ + n] = w * y;
          }
      }
    }
  }

  Topology topology() const { return topology_; }
  Bandlimit bandlimit() const { return band_; }
  ChartDomain domain() const {
    return topology_ == Topology::torus_like ? ChartDomain{{0, 2 * std::numbers::pi}, {0, 2 * std::numbers::pi}}
                                             : ChartDomain{{0, 2 * std::numbers::pi}, {0, std::numbers::pi}};
  }
  const QuadratureGrid& grid() const { return grid_; }
  std::size_t size() const { return static_cast<std::size_t>(na_) * nb_; }

  // Discrete projection of nodal values on grid(); exact for bandlimited data.
  std::vector<double> fit(const std::vector<double>& nodal) const {
    const int nu = grid_.nu, nv = grid_.nv;
    if (nodal.size() != grid_.size()) throw ArityError("nodal data does not match the collocation grid");
    std::vector<double> c(size(), 0.0);
    std::vector<double> f(na_);
    for (int j = 0; j < nv; ++j) {
      // Fourier coefficients of row j in u.
      std::fill(f.begin(), f.end(), 0.0);
      for (int i = 0; i < nu; ++i) {
        const double x = nodal[static_cast<std::size_t>(i) * nv + j];
        const double* ui = &u_table_[static_cast<std::size_t>(i) * na_];
        for (int a = 0; a < na_; ++a) f[a] += x * ui[a];
      }
      for (int a = 0; a < na_; ++a) {
        const double fa = f[a] * (a == band_.mu ? 1.0 : 2.0) / nu;
        const double* w = v_row(v_fit_, j, a);
        double* ca = &c[static_cast<std::size_t>(a) * nb_];
        for (int b = 0; b < nb_; ++b) ca[b] += fa * w[b];
      }
    }
    return c;
  }

  std::vector<double> synthesize(const std::vector<double>& c) const {
    const int nu = grid_.nu, nv = grid_.nv;
    if (c.size() != size()) throw ArityError("coefficient array does not match the bandlimit");
    std::vector<double> out(grid_.size(), 0.0);
    std::vector<double> g(na_);
    for (int j = 0; j < nv; ++j) {
      for (int a = 0; a < na_; ++a) {
        const double* vb = v_row(v_table_, j, a);
        const double* ca = &c[static_cast<std::size_t>(a) * nb_];
        double s = 0.0;
        for (int b = 0; b < nb_; ++b) s += ca[b] * vb[b];
        g[a] = s;
      }
      for (int i = 0; i < nu; ++i) {
        const double* ui = &u_table_[static_cast<std::size_t>(i) * na_];
        double s = 0.0;
        for (int a = 0; a < na_; ++a) s += ui[a] * g[a];
        out[static_cast<std::size_t>(i) * nv + j] = s;
      }
    }
    return out;
  }

  // Chart jet of the series at an arbitrary point.
  ChartJet jet(const std::vector<double>& c, const Vec2& uv, int order) const {
    std::vector<Row> ud, vd;
    tables(uv, order, ud, vd);
    return jet_from_tables(c, ud, vd, order);
  }

  // Per-point derivative tables, shared by several series at the same point.
  // vd has one row per b_index on the torus and per (a, n) on the sphere.
  void tables(const Vec2& uv, int order, std::vector<Row>& ud, std::vector<Row>& vd) const {
    ud.resize(na_);
    for (int a = 0; a < na_; ++a) detail::fourier_derivatives(a - band_.mu, uv[0], order, ud[a].data());
    if (topology_ == Topology::torus_like) {
      vd.resize(nb_);
      for (int b = 0; b < nb_; ++b) detail::fourier_derivatives(b - band_.mv, uv[1], order, vd[b].data());
      return;
    }
    vd.resize(static_cast<std::size_t>(na_) * nb_);
    if (!harmonic_) {
      auto p = detail::legendre_derivatives(nb_ - 1, xi(uv[1]), order);
      const double s = 2.0 / std::numbers::pi;
      for (auto& row : p) {
        double f = 1.0;
        for (int k = 0; k <= order; ++k, f *= s) row[k] *= f;
      }
      for (int a = 0; a < na_; ++a) std::copy(p.begin(), p.end(), vd.begin() + static_cast<std::ptrdiff_t>(a) * nb_);
      return;
    }
    const auto p = detail::associated_legendre_rows(band_.mu, band_.mv, uv[1], order);
    for (int a = 0; a < na_; ++a)
      std::copy_n(&p[static_cast<std::size_t>(std::abs(a - band_.mu)) * nb_], nb_, &vd[static_cast<std::size_t>(a) * nb_]);
  }

  ChartJet jet_from_tables(const std::vector<double>& c, const std::vector<Row>& ud, const std::vector<Row>& vd,
                           int order) const {
    const bool sphere = topology_ == Topology::sphere_like;
    // s[a][j] = sum_b c[a][b] d^j psi_b
    std::vector<Row> s(na_);
    for (int a = 0; a < na_; ++a) {
      s[a].fill(0.0);
      const double* ca = &c[static_cast<std::size_t>(a) * nb_];
      const Row* va = sphere ? &vd[static_cast<std::size_t>(a) * nb_] : vd.data();
      for (int b = 0; b < nb_; ++b) {
        if (ca[b] == 0.0) continue;
        for (int j = 0; j <= order; ++j) s[a][j] += ca[b] * va[b][j];
      }
    }
    ChartJet r(order, 0.0);
    for (int i = 0; i <= order; ++i)
      for (int j = 0; i + j <= order; ++j) {
        double d = 0.0;
        for (int a = 0; a < na_; ++a) d += ud[a][i] * s[a][j];
        r[ChartJet::index_of({i, j})] = d / (factorial(i) * factorial(j));
      }
    return r;
  }

  // Signed Fourier index in u and the second index (Fourier index or harmonic degree).
  std::array<int, 2> wavenumbers(std::size_t index) const {
    const int a = static_cast<int>(index) / nb_ - band_.mu, b = static_cast<int>(index) % nb_;
    return {a, topology_ == Topology::torus_like ? b - band_.mv : b};
  }
  // Frequency relative to what the grid resolves: the Nyquist frequency in u
  // and on periodic or harmonic v (degree n oscillates like cos(n v)); the top
  // Gauss-exact degree for latitude Legendre.
  double eta(std::size_t index) const {
    const auto [a, b] = wavenumbers(index);
    const double eu = std::abs(a) / (0.5 * grid_.nu);
    const double ev = topology_ == Topology::sphere_like && !harmonic_ ? b / double(grid_.nv - 1)
                                                                        : std::abs(b) / (0.5 * grid_.nv);
    return std::max(eu, ev);
  }

 private:
  // Uniform in u, Gauss-Legendre in cos v; weights integrate du dv.
  static QuadratureGrid harmonic_grid(int nu, int nv) {
    std::vector<double> x, w;
    gauss_legendre(nv, -1.0, 1.0, x, w);
    QuadratureGrid g;
    g.rule = QuadratureRule::gauss_legendre_latitude;
    g.nu = nu;
    g.nv = nv;
    const double du = 2 * std::numbers::pi / nu;
    for (int i = 0; i < nu; ++i)
      for (int j = 0; j < nv; ++j) {
        const double v = std::acos(x[nv - 1 - j]);
        g.nodes.push_back({i * du, v});
        g.weights.push_back(du * w[nv - 1 - j] / std::sin(v));
      }
    return g;
  }
  static double xi(double v) { return 2.0 * v / std::numbers::pi - 1.0; }
  std::size_t v_stride() const { return topology_ == Topology::torus_like ? nb_ : static_cast<std::size_t>(na_) * nb_; }
  const double* v_row(const std::vector<double>& t, int j, int a) const {
    return &t[static_cast<std::size_t>(j) * v_stride() + (topology_ == Topology::torus_like ? 0 : a * nb_)];
  }
  static double factorial(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
  }

  Topology topology_;
  Bandlimit band_;
  bool harmonic_ = false;
  int na_ = 1, nb_ = 1;
  QuadratureGrid grid_;
  std::vector<double> u_table_;  // [i][a] basis values at grid columns
  std::vector<double> v_table_;  // [j][b] or [j][a][n] basis values at grid rows
  std::vector<double> v_fit_;    // same layout, projection weights
};

// exp(-alpha eta^p); alpha = 36 ln 10 leaves 1e-36 at the grid Nyquist frequency.
struct SpectralFilter {
  double alpha = 36.0 * std::numbers::ln10;
  int power = 36;
  double operator()(double eta) const { return std::exp(-alpha * std::pow(eta, power)); }
};

class SpectralSurface final : public ImmersionSource {
 public:
  // torus_like: three coefficient arrays (x, y, z); sphere_like: one radial array.
  SpectralSurface(std::shared_ptr<const SpectralBasis> basis, std::vector<std::vector<double>> coefficients)
      : basis_(std::move(basis)), c_(std::move(coefficients)) {
    const std::size_t want = basis_->topology() == Topology::torus_like ? 3 : 1;
    if (c_.size() != want) throw ArityError("spectral surface expects " + std::to_string(want) + " coefficient arrays");
    for (const auto& c : c_)
      if (c.size() != basis_->size()) throw ArityError("coefficient array does not match the bandlimit");
  }

  // Collocation fit of nodal positions on basis->grid(). Sphere positions are
  // reduced to their radius, so they must lie on rays through the origin.
  static SpectralSurface fit(std::shared_ptr<const SpectralBasis> basis, const std::vector<Vec3>& nodal) {
    std::vector<std::vector<double>> c;
    if (basis->topology() == Topology::torus_like) {
      for (int k = 0; k < 3; ++k) {
        std::vector<double> comp(nodal.size());
        for (std::size_t i = 0; i < nodal.size(); ++i) comp[i] = nodal[i][k];
        c.push_back(basis->fit(comp));
      }
    } else {
      std::vector<double> rho(nodal.size());
      for (std::size_t i = 0; i < nodal.size(); ++i) rho[i] = norm(nodal[i]);
      c.push_back(basis->fit(rho));
    }
    return {basis, std::move(c)};
  }

  static SpectralSurface fit_radius(std::shared_ptr<const SpectralBasis> basis, const std::vector<double>& rho) {
    if (basis->topology() != Topology::sphere_like) throw DomainError("radial fits need a sphere_like basis");
    auto c = basis->fit(rho);
    return {basis, {std::move(c)}};
  }

  ChartVec3 jets(const Vec2& uv, int order) const override {
    std::vector<std::array<double, kMaxJetOrder + 1>> ud, vd;
    basis_->tables(uv, order, ud, vd);
    if (basis_->topology() == Topology::torus_like)
      return {basis_->jet_from_tables(c_[0], ud, vd, order), basis_->jet_from_tables(c_[1], ud, vd, order),
              basis_->jet_from_tables(c_[2], ud, vd, order)};
    const ChartJet rho = basis_->jet_from_tables(c_[0], ud, vd, order);
    const ChartJet u = ChartJet::variable(0, uv[0], order), v = ChartJet::variable(1, uv[1], order);
    const ChartJet sv = sin(v);
    return {rho * sv * cos(u), rho * sv * sin(u), rho * cos(v)};
  }

  // Nodal positions on the collocation grid.
  std::vector<Vec3> nodal() const {
    std::vector<Vec3> out(basis_->grid().size());
    if (basis_->topology() == Topology::torus_like) {
      for (int k = 0; k < 3; ++k) {
        const auto x = basis_->synthesize(c_[k]);
        for (std::size_t i = 0; i < out.size(); ++i) out[i][k] = x[i];
      }
    } else {
      const auto rho = basis_->synthesize(c_[0]);
      for (std::size_t i = 0; i < out.size(); ++i) {
        const Vec2& uv = basis_->grid().nodes[i];
        out[i] = rho[i] * Vec3{std::sin(uv[1]) * std::cos(uv[0]), std::sin(uv[1]) * std::sin(uv[0]), std::cos(uv[1])};
      }
    }
    return out;
  }
  std::vector<double> nodal_radius() const { return basis_->synthesize(c_.at(0)); }

  void apply_filter(const SpectralFilter& filter) {
    for (auto& c : c_)
      for (std::size_t i = 0; i < c.size(); ++i) c[i] *= filter(basis_->eta(i));
  }

  const SpectralBasis& basis() const { return *basis_; }
  std::shared_ptr<const SpectralBasis> basis_ptr() const { return basis_; }
  Topology topology() const { return basis_->topology(); }
  const std::vector<std::vector<double>>& coefficients() const { return c_; }

  ClosedSurface surface(const std::string& name, Orientation orientation) const {
    return {name, topology(), std::make_shared<SpectralSurface>(*this), basis_->domain(), orientation};
  }
  ClosedSurface surface(const std::string& name, Orientation orientation, const ClosedSurface::Frame& frame) const {
    return {name, topology(), std::make_shared<SpectralSurface>(*this), basis_->domain(), orientation, frame};
  }

 private:
  std::shared_ptr<const SpectralBasis> basis_;
  std::vector<std::vector<double>> c_;
};

struct SpectralProjection {
  SpectralSurface surface;
  double reconstruction_error = 0.0;  // max |X_fit - X| / scale at off-grid points
};

inline constexpr double kAliasingTolerance = 1e-8;

// Collocation fit of a catalog surface. The chart must be the standard one
// for its topology; sphere_like input must be a radial graph about the origin.
inline SpectralProjection project_to_spectral(const ClosedSurface& s, Bandlimit band) {
  auto basis = std::make_shared<const SpectralBasis>(s.topology(), band);
  const ChartDomain d = basis->domain(), sd = s.domain();
  if (std::abs(sd.u[0] - d.u[0]) > 1e-12 || std::abs(sd.u[1] - d.u[1]) > 1e-12 || std::abs(sd.v[0] - d.v[0]) > 1e-12 ||
      std::abs(sd.v[1] - d.v[1]) > 1e-12)
    throw DomainError("spectral projection needs the standard chart domain for " + std::string(to_string(s.topology())));
  const auto& g = basis->grid();
  std::vector<Vec3> x(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) x[i] = s.position(g.nodes[i]);
  if (s.topology() == Topology::sphere_like) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Vec2& uv = g.nodes[i];
      const Vec3 dir{std::sin(uv[1]) * std::cos(uv[0]), std::sin(uv[1]) * std::sin(uv[0]), std::cos(uv[1])};
      if (norm(x[i] - norm(x[i]) * dir) > 1e-8 * s.scale())
        throw DomainError("sphere_like spectral surfaces are radial graphs over the latitude chart; '" + s.name() +
                          "' is not");
    }
  }
  SpectralProjection p{SpectralSurface::fit(basis, x), 0.0};

  // Off-grid check points: shifted uniform in u, a different Gauss rule or shift in v.
  const int cu = g.nu + 1, cv = g.nv + 1;
  const auto check = make_grid(s.topology(), d, cu, cv);
  double err = 0.0;
  for (const auto& node : check.nodes) {
    Vec2 uv = node;
    uv[0] += 0.37 * (d.u[1] - d.u[0]) / cu;
    if (s.topology() == Topology::torus_like) uv[1] += 0.61 * (d.v[1] - d.v[0]) / cv;
    const auto fj = p.surface.jets(uv, 0);
    const Vec3 xf{fj[0].value(), fj[1].value(), fj[2].value()};
    err = std::max(err, norm(xf - s.position(uv)));
  }
  p.reconstruction_error = err / s.scale();
  if (p.reconstruction_error > kAliasingTolerance)
    throw ConvergenceError("bandlimit (" + std::to_string(band.mu) + ", " + std::to_string(band.mv) +
                           ") leaves reconstruction error " + std::to_string(p.reconstruction_error) +
                           " on '" + s.name() + "'; raise the bandlimit" +
                           (basis->topology() == Topology::sphere_like && band.sphere == SphereBasis::harmonic
                                ? " or, for a radius that is not smooth at the poles, use the latitude_legendre basis"
                                : ""));
  return p;
}

}  // namespace csl
