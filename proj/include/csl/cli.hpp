#pragma once

// Command implementations behind the csl executable. Each command takes a
// resolved RunConfig, writes its artifacts under the output directory and
// returns the process exit code: 0 iff nothing it gates failed.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "csl/catalog.hpp"
#include "csl/config.hpp"
#include "csl/flow.hpp"
#include "csl/parallel.hpp"
#include "csl/quadrature.hpp"
#include "csl/report.hpp"
#include "csl/spectral.hpp"
#include "csl/suite.hpp"
#include "csl/variation.hpp"

namespace csl::cli {

// Exit codes beyond 0 (success) and 1 (a gated check failed).
inline constexpr int kUsageError = 2;

struct GlobalOptions {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out_dir;
};

// Config file (or defaults) with command-line overrides applied.
inline RunConfig resolve(const GlobalOptions& g) {
  RunConfig c = g.config ? load_config(*g.config) : default_config();
  if (g.seed) c.seed = *g.seed;
  if (g.out_dir) c.out_dir = *g.out_dir;
  if (g.threads) set_thread_count(*g.threads);
  return c;
}

// Relative artifact paths live under the output directory.
inline std::filesystem::path artifact(const RunConfig& c, const std::string& name) {
  const std::filesystem::path p(name);
  return p.is_absolute() ? p : std::filesystem::path(c.out_dir) / p;
}

// A surface or factor given on the command line: inline JSON, @file, or a bare kind.
inline Json spec_argument(const std::string& option, const std::string& text) {
  std::string body = text;
  if (!text.empty() && text[0] == '@') {
    std::ifstream in(text.substr(1));
    if (!in) throw ConfigError(option, 0, "cannot open " + text.substr(1));
    std::stringstream ss;
    ss << in.rdbuf();
    body = ss.str();
  }
  const auto first = body.find_first_not_of(" \t\r\n");
  if (first == std::string::npos || body[first] != '{') return Json{{"kind", body}};
  try {
    return Json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(option, 0, std::string("malformed JSON: ") + e.what());
  }
}

inline SurfaceEntry surface_argument(const std::string& text) {
  const Json j = spec_argument("--surface", text);
  try {
    return {j, surface_from_json(j)};
  } catch (const ConfigError& e) {
    throw ConfigError("--surface" + e.path(), 0, e.message());
  }
}

inline FactorEntry factor_argument(const std::string& text) {
  const Json j = spec_argument("--factor", text);
  try {
    return {j, factor_from_json(j)};
  } catch (const ConfigError& e) {
    throw ConfigError("--factor" + e.path(), 0, e.message());
  }
}

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

// ---------------------------------------------------------------------------
// catalog

inline std::string catalog_listing(bool json) {
  const auto surfaces = surface_catalog();
  const auto factors = factor_catalog();
  if (json) {
    Json j;
    for (const auto* group : {&surfaces, &factors}) {
      Json arr = Json::array();
      for (const auto& e : *group)
        arr.push_back({{"kind", e.name}, {"parameters", e.parameters}, {"description", e.description}});
      j[group == &surfaces ? "surfaces" : "factors"] = arr;
    }
    return j.dump(2) + "\n";
  }
  std::ostringstream out;
  auto section = [&](const char* title, const std::vector<CatalogEntry>& entries) {
    out << title << "\n";
    for (const auto& e : entries) {
      out << "  " << std::left << std::setw(20) << e.name << e.description << "\n";
      if (!e.parameters.empty()) out << "  " << std::setw(20) << "" << "{" << e.parameters << "}\n";
    }
  };
  section("surfaces", surfaces);
  section("factors", factors);
  return out.str();
}

// ---------------------------------------------------------------------------
// check

inline int check(const RunConfig& cfg, std::ostream& log) {
  const SuiteReport report = run_suite(cfg);
  const auto path = artifact(cfg, cfg.report);
  write_atomic(path, to_json(report).dump(2) + "\n");
  auto timings = path;
  timings.replace_extension();
  timings += "_timings.csv";
  write_atomic(timings, timings_csv(report));

  for (const auto& c : report.checks) {
    if (c.verdict != Verdict::fail) continue;
    log << "FAIL " << c.suite << "/" << c.name;
    if (!c.surface.empty()) log << " [" << c.surface << (c.factor.empty() ? "" : ", " + c.factor) << "]";
    else if (!c.factor.empty()) log << " [" << c.factor << "]";
    log << " discrepancy " << format_number(c.discrepancy) << " > " << format_number(c.tolerance);
    if (!c.note.empty()) log << " (" << c.note << ")";
    log << "\n";
  }
  log << report.checks.size() << " checks: " << report.count(Verdict::pass) << " pass, "
      << report.count(Verdict::fail) << " fail, " << report.count(Verdict::report_only) << " report-only\n"
      << "report: " << path.string() << "\ntimings: " << timings.string() << "\n";
  return report.ok() ? 0 : 1;
}

// ---------------------------------------------------------------------------
// integrate

inline std::vector<std::string> integrand_names() {
  return {"area", "total_mean_curvature", "willmore_energy", "total_gauss_curvature", "omega_sharp_norm2",
          "minimality_integral"};
}

inline Integrand named_integrand(const std::string& name) {
  if (name == "area") return integrands::area();
  if (name == "total_mean_curvature") return integrands::mean_curvature();
  if (name == "willmore_energy") return integrands::willmore();
  if (name == "total_gauss_curvature") return integrands::gauss();
  if (name == "omega_sharp_norm2") return integrands::omega_sharp_norm2();
  if (name == "minimality_integral") return integrands::mean_times_omega_sharp_norm2();
  throw ConfigError("--integrand", 0, "unknown integrand '" + name + "'");
}

struct IntegrateOptions {
  std::vector<std::string> integrands = integrand_names();
  std::string table = "integrals.csv";
};

// Every configured surface x factor pair; an error estimate above the
// integral tolerance counts as non-convergence.
inline int integrate(const RunConfig& cfg, const IntegrateOptions& opt, std::ostream& log) {
  std::vector<Integrand> parts;
  for (const auto& n : opt.integrands) parts.push_back(named_integrand(n));
  const auto sl = detail::entry_labels(cfg.surfaces);
  const auto fl = detail::entry_labels(cfg.factors);
  std::vector<IntegralRow> rows;
  bool ok = true;
  for (std::size_t i = 0; i < cfg.surfaces.size(); ++i)
    for (std::size_t j = 0; j < cfg.factors.size(); ++j)
      for (auto& r : integrate_all(cfg.surfaces[i].surface, cfg.factors[j].factor, parts, cfg.nu, cfg.nv, cfg.order)) {
        const bool converged = r.error <= cfg.tolerances.integral * std::max(1.0, std::abs(r.value));
        ok = ok && converged;
        log << std::left << std::setw(15) << sl[i] << " " << std::setw(19) << fl[j] << " " << std::setw(24) << r.name
            << std::right << std::setw(24) << std::setprecision(15) << r.value << "  err "
            << format_number(r.error) << (converged ? "" : "  UNCONVERGED") << "\n";
        rows.push_back({sl[i], fl[j], std::move(r), converged});
      }
  const auto path = artifact(cfg, opt.table);
  write_atomic(path, integrals_csv(rows));
  log << "table: " << path.string() << "\n";
  return ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// vary

struct VaryOptions {
  std::string speed;                 // f as an expression in u, v, x, y, z
  std::string quantity;              // lambda1 | lambda2 | H | K | area_element | area | total_H | willmore | gauss_bonnet
  std::optional<Vec2> at;            // chart point for pointwise quantities; seeded random otherwise
  std::string report = "variation_report.json";
};

inline std::vector<VariationReport> variation_reports(const ClosedSurface& s, const ConformalFactor& f,
                                                      const NormalVariation& v, const std::string& q, const Vec2& uv,
                                                      int nu, int nv, int order) {
  const bool flat = f.is_flat();
  std::vector<VariationReport> out;
  if (is_point_quantity(q)) {
    const auto vp = variation_point(s, f, v, uv, order);
    const auto fd = fd_delta(point_quantity(q, uv), s, f, v);
    if (q == "lambda1" || q == "lambda2") {
      auto r = make_report("delta_" + q, delta_eigenvalue_analytic(vp, q == "lambda1" ? 0 : 1), fd,
                           !vp.geometry.umbilic);
      if (vp.geometry.umbilic) r.flags.push_back("umbilic");
      out.push_back(std::move(r));
    } else if (q == "H") {
      out.push_back(make_report("delta_mean_curvature", delta_mean_curvature_analytic(vp), fd));
    } else if (q == "area_element") {
      out.push_back(make_report("delta_area_element", delta_area_element_analytic(vp), fd));
    } else {
      const auto t = delta_gauss_curvature_analytic(vp);
      out.push_back(make_report("delta_gauss_curvature_classical", t.classical, fd, flat));
      out.push_back(make_report("delta_gauss_curvature", t.stated, fd, flat));
      out.push_back(make_report("delta_gauss_curvature_half_coefficient", t.alternative, fd, false));
      for (auto& r : out)
        if (!flat) r.flags.push_back("sigma_nonzero");
    }
    return out;
  }
  const auto fd = fd_delta(functional_quantity(q, nu, nv), s, f, v);
  auto total = [&](const Integrand& in) { return quadrature_total(s, f, in, nu, nv, order); };
  if (q == "area") {
    out.push_back(make_report("delta_area", total(variation_integrands::area(v)), fd));
  } else if (q == "total_H") {
    out.push_back(make_report("delta_total_mean_curvature", total(variation_integrands::total_mean_stated(v)), fd, flat));
    out.push_back(make_report("delta_total_mean_curvature_general", total(variation_integrands::total_mean_general(v)), fd));
  } else if (q == "willmore") {
    out.push_back(make_report("delta_willmore", total(variation_integrands::willmore_stated(v)), fd, flat));
    out.push_back(make_report("delta_willmore_general", total(variation_integrands::willmore_general(v)), fd));
  } else {
    out.push_back(make_report("delta_gauss_bonnet", 0.0, fd));
  }
  if (!flat && out.size() == 2) out.front().flags.push_back("tangency_and_harmonicity_not_certified");
  return out;
}

// First configured surface and factor.
inline int vary(const RunConfig& cfg, const VaryOptions& opt, std::ostream& log) {
  if (cfg.surfaces.empty() || cfg.factors.empty()) throw ConfigError("vary", 0, "needs a surface and a factor");
  const auto& s = cfg.surfaces.front().surface;
  const auto& f = cfg.factors.front().factor;
  const auto v = make_variation(opt.speed);
  Vec2 uv{};
  if (opt.at) {
    uv = *opt.at;
  } else {
    std::mt19937_64 rng(cfg.seed);
    uv = detail::random_chart_point(s, rng);
  }
  const int gn = std::min(cfg.nu, 64), gm = std::min(cfg.nv, 64);
  const auto reports = variation_reports(s, f, v, opt.quantity, uv, gn, gm, cfg.order);

  Json j;
  j["version"] = kVersion;
  j["surface"] = cfg.surfaces.front().spec;
  j["factor"] = cfg.factors.front().spec;
  j["speed"] = opt.speed;
  j["quantity"] = opt.quantity;
  if (is_point_quantity(opt.quantity)) j["at"] = {uv[0], uv[1]};
  else j["grid"] = {gn, gm};
  j["reports"] = Json::array();
  bool ok = true;
  for (const auto& r : reports) {
    j["reports"].push_back(to_json(r));
    ok = ok && (!r.gated || r.pass);
    log << std::left << std::setw(42) << r.quantity << " analytic " << std::setw(14) << format_number(r.analytic)
        << " fd " << std::setw(14) << format_number(r.fd.value) << " discrepancy " << format_number(r.discrepancy)
        << "  " << (!r.gated ? "report-only" : r.pass ? "pass" : "fail");
    for (const auto& fl : r.flags) log << " [" << fl << "]";
    log << "\n";
  }
  const auto path = artifact(cfg, opt.report);
  write_atomic(path, j.dump(2) + "\n");
  log << "report: " << path.string() << "\n";
  return ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// flow

struct FlowOptions {
  std::optional<std::string> initial;  // checkpoint to resume from
  int checkpoint_every = 10;           // accepted steps between checkpoints
};

// Runs or resumes the configured flow. The trace and checkpoint are rewritten
// atomically every `checkpoint_every` steps, so an interrupted run resumes
// from its last checkpoint with a consistent trace.
inline int flow(const RunConfig& cfg, const FlowOptions& opt, std::ostream& log) {
  const auto& fs = cfg.flow;
  const auto trace_path = artifact(cfg, fs.trace);
  const auto checkpoint_path = artifact(cfg, fs.checkpoint);
  FlowConfig fc = fs.flow;
  Json factor_spec = fs.factor;
  int offset = 0;
  std::vector<std::string> rows;
  std::optional<SpectralSurface> start;

  if (opt.initial) {
    auto c = read_checkpoint(*opt.initial);
    factor_spec = c.factor;
    offset = c.step;
    fc.dt0 = c.dt;
    fc.max_steps = std::max(0, fc.max_steps - c.step);
    start = std::move(c.surface);
    // Keep the rows the checkpoint covers; later ones belong to the lost tail.
    std::ifstream in(trace_path);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (std::stoi(line.substr(0, line.find(','))) > offset) break;
      rows.push_back(line + "\n");
    }
    log << "resuming at step " << offset << " from " << *opt.initial << "\n";
  } else {
    auto p = project_to_spectral(surface_from_json(fs.surface), fs.band);
    log << "projected to bandlimit (" << fs.band.mu << ", " << fs.band.mv << "), reconstruction error "
        << format_number(p.reconstruction_error) << "\n";
    start = std::move(p.surface);
  }
  const ConformalFactor factor = factor_from_json(factor_spec);

  auto write_trace = [&] {
    std::string text = flow_trace_header();
    for (const auto& r : rows) text += r;
    write_atomic(trace_path, text);
  };
  int since = 0;
  double next_dt = fc.dt0;
  const auto observer = [&](const FlowRecord& rec, const SpectralSurface& s, double dt) {
    next_dt = dt;
    if (opt.initial && rec.step == 0) return;  // already in the trace
    FlowRecord shifted = rec;
    shifted.step += offset;
    rows.push_back(flow_trace_row(shifted));
    if (++since >= opt.checkpoint_every) {
      since = 0;
      write_trace();
      write_atomic(checkpoint_path, checkpoint_json(s, shifted.step, dt, shifted.energy, factor_spec).dump() + "\n");
    }
  };
  const FlowTrace t = run_flow(*start, factor, fc, observer);

  FlowRecord last = t.records.back();
  last.step += offset;
  write_trace();
  write_atomic(checkpoint_path,
               checkpoint_json(t.final_surface, last.step, next_dt, last.energy, factor_spec).dump() + "\n");
  const auto& first = t.records.front();
  log << "termination: " << t.termination << " after " << last.step << " steps\n"
      << "energy " << std::setprecision(12) << first.energy << " -> " << last.energy << "\n"
      << "L2(W) " << format_number(first.w_l2) << " -> " << format_number(last.w_l2) << "\n"
      << "total Gauss curvature drift " << format_number(std::abs(last.total_gauss - first.total_gauss)) << "\n"
      << "trace: " << trace_path.string() << "\ncheckpoint: " << checkpoint_path.string() << "\n";
  return t.termination == "stall" ? 1 : 0;
}

}  // namespace csl::cli
