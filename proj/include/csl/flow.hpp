#pragma once

// Gradient descent of int H^2 dOmega. Each step moves the collocation nodes
// along N with speed -P(W), refits the series and filters it; a step is kept
// only if the energy drops by at least a fixed fraction of the first-order
// prediction, otherwise dt is halved.
//
// P is the Sobolev smoother 1 / (1 + (l kappa)^4) on the chart spectrum,
// applied to W sqrt(g). It is symmetric and positive on the collocation grid,
// so dE = -dt <P(W sqrt g), W sqrt g> stays negative while stiff modes are
// damped like an implicit step.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "csl/ambient.hpp"
#include "csl/errors.hpp"
#include "csl/parallel.hpp"
#include "csl/quadrature.hpp"
#include "csl/spectral.hpp"
#include "csl/surface.hpp"
#include "csl/variation.hpp"

namespace csl {

struct FlowConfig {
  int max_steps = 5000;
  double dt0 = 0.0;                 // 0: 1e-3 L^4 / max|W|
  double tol = 1e-4;                // on the L2 norm of W
  bool filter = true;
  SpectralFilter spectral_filter;
  double smoothing_length = 1.0;    // l in P; 0 disables the smoother
  double growth = 1.5;              // dt factor after an accepted step
  double armijo = 0.5;              // required fraction of the first-order energy drop
  int max_halvings = 20;
};

struct FlowRecord {
  int step = 0;
  double dt = 0.0;
  double energy = 0.0;
  double w_sup = 0.0;
  double w_l2 = 0.0;
  double area = 0.0;
  double total_gauss = 0.0;
};

// Nodal fields and totals of one surface on its collocation grid.
struct FlowEvaluation {
  std::vector<double> w;            // Willmore residual
  std::vector<double> density;      // area density
  std::vector<Vec3> normal;
  std::vector<double> conformal;    // e^sigma at the node
  double energy = 0.0, area = 0.0, total_gauss = 0.0, w_sup = 0.0, w_l2 = 0.0, tangency_sup = 0.0;
};

inline FlowEvaluation evaluate_flow_fields(const SpectralSurface& s, const ConformalFactor& factor,
                                           const ClosedSurface::Frame& frame) {
  const ClosedSurface surface = s.surface("flow", Orientation::inward, frame);
  const auto& grid = s.basis().grid();
  const std::size_t n = grid.size();
  FlowEvaluation e;
  e.w.resize(n);
  e.density.resize(n);
  e.normal.resize(n);
  e.conformal.resize(n);
  std::vector<double> h2(n), k(n), w2(n), tang(n), one(n);
  parallel_for(n, [&](std::size_t i) {
    const auto sp = surface_at(surface, factor, grid.nodes[i], 4);
    e.w[i] = willmore_el_residual(sp);
    e.density[i] = sp.area_density;
    e.normal[i] = sp.normal;
    e.conformal[i] = sp.ambient.conformal();
    const double wd = grid.weights[i] * sp.area_density;
    h2[i] = wd * sp.mean_curvature * sp.mean_curvature;
    k[i] = wd * sp.gauss_intrinsic;
    w2[i] = wd * e.w[i] * e.w[i];
    one[i] = wd;
    tang[i] = sp.tangency_residual;
  });
  e.energy = pairwise_sum(h2);
  e.area = pairwise_sum(one);
  e.total_gauss = pairwise_sum(k);
  e.w_l2 = std::sqrt(pairwise_sum(w2));
  for (std::size_t i = 0; i < n; ++i) e.w_sup = std::max(e.w_sup, std::abs(e.w[i]));
  e.tangency_sup = *std::max_element(tang.begin(), tang.end());
  return e;
}

struct FlowState {
  SpectralSurface surface;
  FlowEvaluation fields;
};

inline FlowState make_flow_state(SpectralSurface s, const ConformalFactor& factor, const ClosedSurface::Frame& frame) {
  auto fields = evaluate_flow_fields(s, factor, frame);
  return {std::move(s), std::move(fields)};
}

// Normal speed -P(W sqrt g) / mean(sqrt g) on the collocation grid.
inline std::vector<double> descent_speed(const SpectralSurface& s, const FlowEvaluation& e, const FlowConfig& cfg) {
  const std::size_t n = e.w.size();
  std::vector<double> r(n);
  if (cfg.smoothing_length <= 0.0) {
    for (std::size_t i = 0; i < n; ++i) r[i] = -e.w[i];
    return r;
  }
  double mean = 0.0;
  for (double d : e.density) mean += d;
  mean /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = e.w[i] * e.density[i] / mean;
  const auto& basis = s.basis();
  auto c = basis.fit(r);
  const double l = cfg.smoothing_length;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto [a, b] = basis.wavenumbers(i);
    const double k2 = static_cast<double>(a) * a + static_cast<double>(b) * b;
    c[i] /= 1.0 + l * l * l * l * k2 * k2;
  }
  r = basis.synthesize(c);
  for (double& x : r) x = -x;
  return r;
}

// Surface after moving the nodes by dt * speed along N.
inline SpectralSurface advance(const SpectralSurface& s, const FlowEvaluation& e, const std::vector<double>& speed,
                               double dt, const FlowConfig& cfg) {
  const auto basis = s.basis_ptr();
  SpectralSurface out = [&] {
    if (s.topology() == Topology::torus_like) {
      auto x = s.nodal();
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = x[i] + (dt * speed[i]) * e.normal[i];
      return SpectralSurface::fit(basis, x);
    }
    // Radial graph: the radius moves by the normal displacement over d . N,
    // with |N| = e^{-sigma/2} in Euclidean length.
    auto rho = s.nodal_radius();
    const auto& g = basis->grid();
    for (std::size_t i = 0; i < rho.size(); ++i) {
      const Vec2& uv = g.nodes[i];
      const Vec3 d{std::sin(uv[1]) * std::cos(uv[0]), std::sin(uv[1]) * std::sin(uv[0]), std::cos(uv[1])};
      const double dn = dot(d, e.normal[i]);
      if (std::abs(dn) < 1e-3) throw RegularityError("radial graph lost transversality during the flow");
      rho[i] += dt * speed[i] / (e.conformal[i] * dn);
    }
    return SpectralSurface::fit_radius(basis, rho);
  }();
  if (cfg.filter) out.apply_filter(cfg.spectral_filter);
  return out;
}

struct StepResult {
  bool accepted = false;
  FlowState state;
  double dt = 0.0;
  int halvings = 0;
};

// One explicit step with energy backtracking.
inline StepResult flow_step(const FlowState& state, const ConformalFactor& factor, const ClosedSurface::Frame& frame,
                            double dt, const FlowConfig& cfg) {
  if (!(dt > 0.0)) throw ConfigError("", 0, "flow step size must be positive");
  const auto speed = descent_speed(state.surface, state.fields, cfg);
  // dE/dt = int speed W dOmega < 0
  const auto& grid = state.surface.basis().grid();
  std::vector<double> slope_terms(speed.size());
  for (std::size_t i = 0; i < speed.size(); ++i)
    slope_terms[i] = grid.weights[i] * state.fields.density[i] * speed[i] * state.fields.w[i];
  const double slope = pairwise_sum(slope_terms);
  for (int h = 0; h <= cfg.max_halvings; ++h, dt *= 0.5) {
    try {
      auto next = advance(state.surface, state.fields, speed, dt, cfg);
      auto fields = evaluate_flow_fields(next, factor, frame);
      const double drop = state.fields.energy - fields.energy;
      if (drop > 0.0 && drop >= -cfg.armijo * dt * slope)
        return {true, {std::move(next), std::move(fields)}, dt, h};
    } catch (const RegularityError&) {
      // Too large a step folded the surface; halve like any rejected step.
    } catch (const DomainError&) {
    }
  }
  return {false, state, dt, cfg.max_halvings};
}

struct FlowTrace {
  std::vector<FlowRecord> records;  // record 0 is the initial surface
  std::string termination;          // converged | max_steps | stall
  SpectralSurface final_surface;
  FlowEvaluation final_fields;
};

inline FlowRecord make_record(int step, double dt, const FlowEvaluation& e) {
  return {step, dt, e.energy, e.w_sup, e.w_l2, e.area, e.total_gauss};
}

// Called with each recorded state and the step size the controller will try
// next; together they are enough to resume the run exactly.
using FlowObserver = std::function<void(const FlowRecord&, const SpectralSurface&, double next_dt)>;

inline FlowTrace run_flow(const SpectralSurface& initial, const ConformalFactor& factor, const FlowConfig& cfg,
                          const FlowObserver& observer = {}) {
  const ClosedSurface base = initial.surface("flow", Orientation::inward);
  const auto frame = base.frame();
  FlowState state = make_flow_state(initial, factor, frame);
  FlowTrace trace{{}, "", initial, {}};
  trace.records.push_back(make_record(0, 0.0, state.fields));

  double dt = cfg.dt0;
  if (dt <= 0.0) {
    const double L = frame.scale;
    dt = state.fields.w_sup > 0.0 ? 1e-3 * L * L * L * L / state.fields.w_sup : 1.0;
  }
  if (observer) observer(trace.records.back(), state.surface, dt);
  trace.termination = "max_steps";
  for (int step = 1; step <= cfg.max_steps; ++step) {
    if (state.fields.w_l2 < cfg.tol) {
      trace.termination = "converged";
      break;
    }
    auto r = flow_step(state, factor, frame, dt, cfg);
    if (!r.accepted) {
      trace.termination = "stall";
      break;
    }
    const double prev_w = state.fields.w_l2;
    state = std::move(r.state);
    trace.records.push_back(make_record(step, r.dt, state.fields));
    // A rising residual after an accepted step means stiff modes are being
    // overshot even though the energy fell; back off instead of growing.
    dt = state.fields.w_l2 > prev_w ? 0.5 * r.dt : r.dt * cfg.growth;
    if (observer) observer(trace.records.back(), state.surface, dt);
  }
  if (trace.termination == "max_steps" && state.fields.w_l2 < cfg.tol) trace.termination = "converged";
  trace.final_surface = state.surface;
  trace.final_fields = std::move(state.fields);
  return trace;
}

}  // namespace csl
