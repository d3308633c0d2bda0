#pragma once

// Truncated multivariate Taylor arithmetic.
//
// A Jet<N> stores the Taylor coefficients c_alpha = d^alpha f / alpha! of a
// scalar in N variables for every multi-index of total degree <= order.
// Coefficients are laid out densely in graded-lexicographic order: all
// degree-0 terms, then degree 1 (x, y, z), then degree 2 (xx, xy, xz, yy, ...).
// Because the ordering is graded, a jet of order k is a prefix of the same jet
// at any higher order, which is what makes truncation free.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "csl/errors.hpp"

namespace csl {

inline constexpr int kMaxJetOrder = 6;

constexpr int num_monomials(int num_vars, int order) {
  // C(num_vars + order, num_vars)
  long long r = 1;
  for (int i = 1; i <= num_vars; ++i) r = r * (order + i) / i;
  return static_cast<int>(r);
}

template <int NVars>
using MultiIndex = std::array<int, NVars>;

namespace detail {

template <int NVars>
struct MonomialTables {
  static constexpr int kCapacity = num_monomials(NVars, kMaxJetOrder);
  static constexpr int kBase = kMaxJetOrder + 1;
  static constexpr int kLookupSize = [] {
    int s = 1;
    for (int i = 0; i < NVars; ++i) s *= kBase;
    return s;
  }();

  std::array<MultiIndex<NVars>, kCapacity> exponents{};
  std::array<int, kCapacity> degree{};
  std::array<double, kCapacity> factorial{};  // alpha!
  std::array<int, kLookupSize> lookup{};
  // raise[v][i] = index of exponents[i] + e_v, or -1 beyond kMaxJetOrder.
  std::array<std::array<int, kCapacity>, NVars> raise{};
  // lower_var[i] = first variable with a positive exponent, lower[i] the index
  // of exponents[i] - e_{lower_var[i]} (unused for i == 0).
  std::array<int, kCapacity> lower_var{};
  std::array<int, kCapacity> lower{};
  // product[o]: (i, j, k) with deg(i) + deg(j) <= o and alpha_k = alpha_i + alpha_j.
  std::array<std::vector<std::array<std::uint8_t, 3>>, kMaxJetOrder + 1> product;

  static int encode(const MultiIndex<NVars>& a) {
    int code = 0;
    for (int v = 0; v < NVars; ++v) code = code * kBase + a[v];
    return code;
  }

  MonomialTables() {
    lookup.fill(-1);
    int n = 0;
    MultiIndex<NVars> a{};
    for (int d = 0; d <= kMaxJetOrder; ++d) enumerate(d, 0, a, n);

    for (int i = 0; i < kCapacity; ++i) {
      double f = 1.0;
      for (int v = 0; v < NVars; ++v)
        for (int k = 2; k <= exponents[i][v]; ++k) f *= k;
      factorial[i] = f;
      for (int v = 0; v < NVars; ++v) {
        MultiIndex<NVars> b = exponents[i];
        ++b[v];
        raise[v][i] = degree[i] < kMaxJetOrder ? lookup[encode(b)] : -1;
      }
      lower_var[i] = -1;
      lower[i] = -1;
      for (int v = 0; v < NVars; ++v) {
        if (exponents[i][v] > 0) {
          MultiIndex<NVars> b = exponents[i];
          --b[v];
          lower_var[i] = v;
          lower[i] = lookup[encode(b)];
          break;
        }
      }
    }
    for (int o = 0; o <= kMaxJetOrder; ++o) {
      const int s = num_monomials(NVars, o);
      for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j) {
          if (degree[i] + degree[j] > o) continue;
          MultiIndex<NVars> c{};
          for (int v = 0; v < NVars; ++v) c[v] = exponents[i][v] + exponents[j][v];
          product[o].push_back({static_cast<std::uint8_t>(i), static_cast<std::uint8_t>(j),
                                static_cast<std::uint8_t>(lookup[encode(c)])});
        }
    }
  }

 private:
  // Graded-lex: within a degree, larger exponent of earlier variables first.
  void enumerate(int remaining, int var, MultiIndex<NVars>& a, int& n) {
    if (var == NVars - 1) {
      a[var] = remaining;
      int d = 0;
      for (int v = 0; v < NVars; ++v) d += a[v];
      exponents[n] = a;
      degree[n] = d;
      lookup[encode(a)] = n;
      ++n;
      return;
    }
    for (int k = remaining; k >= 0; --k) {
      a[var] = k;
      enumerate(remaining - k, var + 1, a, n);
    }
  }
};

template <int NVars>
const MonomialTables<NVars>& tables() {
  static const MonomialTables<NVars> t;
  return t;
}

}  // namespace detail

template <int NVars>
class Jet {
  static_assert(NVars >= 1 && NVars <= 4, "unsupported number of jet variables");

 public:
  static constexpr int kNumVars = NVars;
  static constexpr int kCapacity = num_monomials(NVars, kMaxJetOrder);

  Jet() { c_[0] = 0.0; }

  // Constant jet.
  explicit Jet(int order, double value = 0.0) : order_(check_order(order)) {
    std::fill_n(c_.begin(), size(), 0.0);
    c_[0] = value;
  }

  // Only the live coefficients are copied; storage past size() is never read.
  Jet(const Jet& o) : order_(o.order_) { std::copy_n(o.c_.begin(), size(), c_.begin()); }
  Jet& operator=(const Jet& o) {
    order_ = o.order_;
    std::copy_n(o.c_.begin(), size(), c_.begin());
    return *this;
  }

  // The coordinate function x_var expanded about `value`.
  static Jet variable(int var, double value, int order) {
    Jet j(order, value);
    if (order >= 1) j.c_[1 + var] = 1.0;
    return j;
  }

  int order() const noexcept { return order_; }
  int size() const noexcept { return num_monomials(NVars, order_); }
  double value() const noexcept { return c_[0]; }

  std::span<const double> coeffs() const noexcept { return {c_.data(), static_cast<std::size_t>(size())}; }
  double operator[](int i) const noexcept { return c_[i]; }
  double& operator[](int i) noexcept { return c_[i]; }

  static const MultiIndex<NVars>& exponent(int i) { return detail::tables<NVars>().exponents[i]; }
  static int index_of(const MultiIndex<NVars>& a) {
    int d = 0;
    for (int v = 0; v < NVars; ++v) d += a[v];
    if (d > kMaxJetOrder) return -1;
    return detail::tables<NVars>().lookup[detail::MonomialTables<NVars>::encode(a)];
  }

  // Taylor coefficient of x^alpha (zero beyond the jet order).
  double coeff(const MultiIndex<NVars>& a) const {
    const int i = index_of(a);
    return (i < 0 || i >= size()) ? 0.0 : c_[i];
  }
  // Partial derivative d^alpha at the expansion point.
  double derivative(const MultiIndex<NVars>& a) const {
    const int i = index_of(a);
    if (i < 0 || i >= size()) throw OrderError("derivative beyond jet order");
    return c_[i] * detail::tables<NVars>().factorial[i];
  }
  // First partial derivative d/dx_var at the expansion point.
  double d(int var) const {
    if (order_ < 1) throw OrderError("first derivative of an order-0 jet");
    return c_[1 + var];
  }

  Jet truncated(int order) const {
    Jet r;
    r.order_ = std::min(order_, check_order(order));
    std::copy_n(c_.begin(), r.size(), r.c_.begin());
    return r;
  }

  // d/dx_var as a jet of order - 1.
  Jet partial(int var) const {
    if (order_ < 1) throw OrderError("partial derivative of an order-0 jet");
    const auto& t = detail::tables<NVars>();
    Jet r;
    r.order_ = order_ - 1;
    const int s = r.size();
    for (int i = 0; i < s; ++i) r.c_[i] = (t.exponents[i][var] + 1) * c_[t.raise[var][i]];
    return r;
  }

  Jet operator-() const {
    Jet r = *this;
    for (int i = 0, s = size(); i < s; ++i) r.c_[i] = -r.c_[i];
    return r;
  }

  Jet& operator+=(const Jet& b) { return combine(b, 1.0); }
  Jet& operator-=(const Jet& b) { return combine(b, -1.0); }
  Jet& operator+=(double b) {
    c_[0] += b;
    return *this;
  }
  Jet& operator-=(double b) {
    c_[0] -= b;
    return *this;
  }
  Jet& operator*=(double b) {
    for (int i = 0, s = size(); i < s; ++i) c_[i] *= b;
    return *this;
  }
  Jet& operator/=(double b) { return *this *= 1.0 / b; }
  Jet& operator*=(const Jet& b) { return *this = *this * b; }

  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r(std::min(a.order_, b.order_), 0.0);
    for (const auto& [i, j, k] : detail::tables<NVars>().product[r.order_]) r.c_[k] += a.c_[i] * b.c_[j];
    return r;
  }

  // Sum_n series[n] * (self - value)^n, i.e. f(self) given the Taylor
  // coefficients of f at value(). The deviation is nilpotent, so the
  // truncated series is exact.
  Jet compose_series(std::span<const double> series) const {
    Jet delta = *this;
    delta.c_[0] = 0.0;
    const int n = std::min<int>(order_, static_cast<int>(series.size()) - 1);
    Jet r(order_, series[n]);
    for (int k = n - 1; k >= 0; --k) {
      r = r * delta;
      r.c_[0] += series[k];
    }
    return r;
  }

 private:
  static int check_order(int order) {
    if (order < 0 || order > kMaxJetOrder) throw OrderError("jet order must lie in [0, 6]");
    return order;
  }

  Jet& combine(const Jet& b, double sign) {
    if (b.order_ < order_) order_ = b.order_;
    for (int i = 0, s = size(); i < s; ++i) c_[i] += sign * b.c_[i];
    return *this;
  }

  int order_ = 0;
  std::array<double, kCapacity> c_;
};

template <int N> Jet<N> operator+(Jet<N> a, const Jet<N>& b) { return a += b; }
template <int N> Jet<N> operator-(Jet<N> a, const Jet<N>& b) { return a -= b; }
template <int N> Jet<N> operator+(Jet<N> a, double b) { return a += b; }
template <int N> Jet<N> operator+(double a, Jet<N> b) { return b += a; }
template <int N> Jet<N> operator-(Jet<N> a, double b) { return a -= b; }
template <int N> Jet<N> operator-(double a, const Jet<N>& b) { return (-b) += a; }
template <int N> Jet<N> operator*(Jet<N> a, double b) { return a *= b; }
template <int N> Jet<N> operator*(double a, Jet<N> b) { return b *= a; }
template <int N> Jet<N> operator/(Jet<N> a, double b) { return a /= b; }

using ChartJet = Jet<2>;
using AmbientJet = Jet<3>;

// ---------------------------------------------------------------------------
// Elementary functions. Each builds the Taylor series of f at the constant
// term and composes it with the nilpotent deviation.

template <int N>
Jet<N> reciprocal(const Jet<N>& a) {
  const double a0 = a.value();
  if (a0 == 0.0) throw DomainError("division by a jet with zero constant term");
  std::array<double, kMaxJetOrder + 1> s{};
  double p = 1.0 / a0;
  for (int n = 0; n <= kMaxJetOrder; ++n) {
    s[n] = (n % 2 == 0 ? 1.0 : -1.0) * p;
    p /= a0;
  }
  return a.compose_series(s);
}

template <int N> Jet<N> operator/(const Jet<N>& a, const Jet<N>& b) { return a * reciprocal(b); }
template <int N> Jet<N> operator/(double a, const Jet<N>& b) { return a * reciprocal(b); }

template <int N>
Jet<N> exp(const Jet<N>& a) {
  const double e = std::exp(a.value());
  if (!std::isfinite(e)) throw DomainError("exp overflow");
  std::array<double, kMaxJetOrder + 1> s{};
  double f = 1.0;
  for (int n = 0; n <= kMaxJetOrder; ++n) {
    if (n > 0) f *= n;
    s[n] = e / f;
  }
  return a.compose_series(s);
}

template <int N>
Jet<N> ln(const Jet<N>& a) {
  const double a0 = a.value();
  if (!(a0 > 0.0)) throw DomainError("ln of a non-positive value");
  std::array<double, kMaxJetOrder + 1> s{};
  s[0] = std::log(a0);
  double p = 1.0;
  for (int n = 1; n <= kMaxJetOrder; ++n) {
    p /= a0;
    s[n] = (n % 2 == 1 ? 1.0 : -1.0) * p / n;
  }
  return a.compose_series(s);
}

template <int N>
Jet<N> sqrt(const Jet<N>& a) {
  const double a0 = a.value();
  if (a0 < 0.0 || (a0 == 0.0 && a.order() > 0)) throw DomainError("sqrt of a non-positive value");
  std::array<double, kMaxJetOrder + 1> s{};
  const double r = std::sqrt(a0);
  double binom = 1.0;  // C(1/2, n)
  double p = r;        // a0^(1/2 - n)
  for (int n = 0; n <= kMaxJetOrder; ++n) {
    s[n] = binom * p;
    binom *= (0.5 - n) / (n + 1);
    if (a0 != 0.0) p /= a0;
  }
  return a.compose_series(s);
}

template <int N>
Jet<N> sin(const Jet<N>& a) {
  const double sv = std::sin(a.value()), cv = std::cos(a.value());
  const double cycle[4] = {sv, cv, -sv, -cv};
  std::array<double, kMaxJetOrder + 1> s{};
  double f = 1.0;
  for (int n = 0; n <= kMaxJetOrder; ++n) {
    if (n > 0) f *= n;
    s[n] = cycle[n % 4] / f;
  }
  return a.compose_series(s);
}

template <int N>
Jet<N> cos(const Jet<N>& a) {
  const double sv = std::sin(a.value()), cv = std::cos(a.value());
  const double cycle[4] = {cv, -sv, -cv, sv};
  std::array<double, kMaxJetOrder + 1> s{};
  double f = 1.0;
  for (int n = 0; n <= kMaxJetOrder; ++n) {
    if (n > 0) f *= n;
    s[n] = cycle[n % 4] / f;
  }
  return a.compose_series(s);
}

template <int N>
Jet<N> pow_int(const Jet<N>& a, int k) {
  if (k < 0) return pow_int(reciprocal(a), -k);
  Jet<N> r(a.order(), 1.0), base = a;
  while (k > 0) {
    if (k & 1) r = r * base;
    k >>= 1;
    if (k) base = base * base;
  }
  return r;
}

template <int N>
bool all_finite(const Jet<N>& a) {
  for (double c : a.coeffs())
    if (!std::isfinite(c)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Composition F(x0 + delta(y)) where F is a jet in NIn variables expanded at
// x0 and delta holds NIn jets in NOut variables with zero constant term.
// Monomials delta^alpha are built once so several outer jets (a field and
// its partial derivatives) can be composed with the same inner map.
template <int NIn, int NOut>
class JetComposer {
 public:
  JetComposer(const std::array<Jet<NOut>, NIn>& inner, int order) : order_(order) {
    std::array<Jet<NOut>, NIn> delta;
    for (int v = 0; v < NIn; ++v) {
      delta[v] = inner[v].truncated(order);
      delta[v][0] = 0.0;
      if (inner[v].order() < order) throw OrderError("inner jet order below composition order");
    }
    const auto& t = detail::tables<NIn>();
    const int count = num_monomials(NIn, order);
    powers_.reserve(count);
    powers_.emplace_back(order, 1.0);
    for (int i = 1; i < count; ++i) powers_.push_back(powers_[t.lower[i]] * delta[t.lower_var[i]]);
  }

  int order() const noexcept { return order_; }

  Jet<NOut> compose(const Jet<NIn>& outer) const {
    const int order = std::min(order_, outer.order());
    Jet<NOut> r(order, 0.0);
    const int count = num_monomials(NIn, order);
    for (int i = 0; i < count; ++i) {
      const double c = outer[i];
      if (c == 0.0) continue;
      const Jet<NOut>& p = powers_[i];
      for (int k = 0, s = r.size(); k < s; ++k) r[k] += c * p[k];
    }
    return r;
  }

 private:
  int order_;
  std::vector<Jet<NOut>> powers_;
};

}  // namespace csl
