#pragma once

// Suite reports, flow traces and their serialization. Reports are JSON with a
// fixed key order; timings live in a separate table so the report itself is
// byte-identical across reruns of the same config.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "csl/errors.hpp"
#include "csl/flow.hpp"
#include "csl/quadrature.hpp"
#include "csl/variation.hpp"

namespace csl {

inline constexpr const char* kVersion = "1.0.0";

enum class Verdict { pass, fail, report_only };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::report_only: return "report-only";
  }
  return "?";
}

struct Check {
  std::string suite;
  std::string name;
  std::string surface;  // empty when the check is not tied to one
  std::string factor;
  double value = 0.0;
  double oracle = 0.0;
  double discrepancy = 0.0;
  double tolerance = 0.0;
  Verdict verdict = Verdict::report_only;
  std::vector<std::string> flags;
  std::string note;
  double seconds = 0.0;
};

struct SuiteReport {
  std::string version = kVersion;
  nlohmann::ordered_json config;
  std::vector<Check> checks;
  double seconds = 0.0;

  int count(Verdict v) const {
    int n = 0;
    for (const auto& c : checks) n += c.verdict == v;
    return n;
  }
  bool ok() const { return count(Verdict::fail) == 0; }
};

// Gated check: pass iff discrepancy <= tolerance; NaN fails.
inline Check gated_check(std::string suite, std::string name, double value, double oracle, double discrepancy,
                         double tolerance) {
  Check c;
  c.suite = std::move(suite);
  c.name = std::move(name);
  c.value = value;
  c.oracle = oracle;
  c.discrepancy = discrepancy;
  c.tolerance = tolerance;
  c.verdict = discrepancy <= tolerance ? Verdict::pass : Verdict::fail;
  return c;
}

inline Check reported_check(std::string suite, std::string name, double value, double oracle, double discrepancy) {
  Check c;
  c.suite = std::move(suite);
  c.name = std::move(name);
  c.value = value;
  c.oracle = oracle;
  c.discrepancy = discrepancy;
  c.verdict = Verdict::report_only;
  return c;
}

inline Check from_variation(std::string suite, const VariationReport& r) {
  Check c;
  c.suite = std::move(suite);
  c.name = r.quantity;
  c.value = r.analytic;
  c.oracle = r.fd.value;
  c.discrepancy = r.discrepancy;
  const double scale = std::max({std::abs(r.analytic), std::abs(r.fd.value), 1.0});
  c.tolerance = std::max(1e-6, 10.0 * r.fd.error / scale);
  c.verdict = !r.gated ? Verdict::report_only : r.pass ? Verdict::pass : Verdict::fail;
  c.flags = r.flags;
  return c;
}

// ---------------------------------------------------------------------------
// Serialization.

namespace detail {

// Non-finite doubles become null rather than invalid JSON.
inline nlohmann::ordered_json number(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const Check& c) {
  nlohmann::ordered_json j;
  j["suite"] = c.suite;
  j["name"] = c.name;
  if (!c.surface.empty()) j["surface"] = c.surface;
  if (!c.factor.empty()) j["factor"] = c.factor;
  j["value"] = detail::number(c.value);
  j["oracle"] = detail::number(c.oracle);
  j["discrepancy"] = detail::number(c.discrepancy);
  j["tolerance"] = c.verdict == Verdict::report_only ? nlohmann::ordered_json(nullptr) : detail::number(c.tolerance);
  j["verdict"] = to_string(c.verdict);
  if (!c.flags.empty()) j["flags"] = c.flags;
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

inline nlohmann::ordered_json to_json(const SuiteReport& r) {
  nlohmann::ordered_json j;
  j["version"] = r.version;
  j["config"] = r.config;
  j["summary"] = {{"checks", r.checks.size()},
                  {"pass", r.count(Verdict::pass)},
                  {"fail", r.count(Verdict::fail)},
                  {"report_only", r.count(Verdict::report_only)}};
  j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : r.checks) j["checks"].push_back(to_json(c));
  return j;
}

inline nlohmann::ordered_json to_json(const IntegralReport& r) {
  return {{"name", r.name},
          {"value", detail::number(r.value)},
          {"error", detail::number(r.error)},
          {"resolution", {r.nu, r.nv}},
          {"integrand_min", detail::number(r.integrand_min)},
          {"integrand_max", detail::number(r.integrand_max)},
          {"argmin", {r.argmin[0], r.argmin[1]}},
          {"argmax", {r.argmax[0], r.argmax[1]}}};
}

inline nlohmann::ordered_json to_json(const VariationReport& r) {
  return {{"quantity", r.quantity},
          {"analytic", detail::number(r.analytic)},
          {"fd", detail::number(r.fd.value)},
          {"fd_error", detail::number(r.fd.error)},
          {"steps", {r.fd.steps[0], r.fd.steps[1]}},
          {"fd_converged", r.fd.converged},
          {"discrepancy", detail::number(r.discrepancy)},
          {"verdict", !r.gated ? "report-only" : r.pass ? "pass" : "fail"},
          {"flags", r.flags}};
}

// %.17g keeps every double round-trippable in CSV.
inline std::string csv_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string timings_csv(const SuiteReport& r) {
  std::ostringstream out;
  out << "suite,name,surface,factor,seconds\n";
  for (const auto& c : r.checks)
    out << c.suite << ',' << c.name << ',' << c.surface << ',' << c.factor << ',' << c.seconds << '\n';
  out << "total,,,," << r.seconds << '\n';
  return out.str();
}

struct IntegralRow {
  std::string surface;
  std::string factor;
  IntegralReport integral;
  bool converged = true;
};

inline std::string integrals_csv(const std::vector<IntegralRow>& rows) {
  std::ostringstream out;
  out << "surface,factor,name,value,error,nu,nv,integrand_min,integrand_max,converged\n";
  for (const auto& row : rows) {
    const auto& r = row.integral;
    out << row.surface << ',' << row.factor << ',' << r.name << ',' << csv_number(r.value) << ','
        << csv_number(r.error) << ',' << r.nu << ',' << r.nv << ',' << csv_number(r.integrand_min) << ','
        << csv_number(r.integrand_max) << ',' << (row.converged ? "true" : "false") << '\n';
  }
  return out.str();
}

inline std::string flow_trace_header() { return "step,dt,energy,w_sup,w_l2,area,total_gauss\n"; }

inline std::string flow_trace_row(const FlowRecord& r) {
  return std::to_string(r.step) + ',' + csv_number(r.dt) + ',' + csv_number(r.energy) + ',' + csv_number(r.w_sup) +
         ',' + csv_number(r.w_l2) + ',' + csv_number(r.area) + ',' + csv_number(r.total_gauss) + '\n';
}

// Writes to a sibling temporary and renames, so readers never see a partial file.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Checkpoints: the coefficient table of a spectral surface, enough to resume a flow.

// `dt` is the step size to try next, so a resumed run repeats the original.
inline nlohmann::ordered_json checkpoint_json(const SpectralSurface& s, int step, double dt, double energy,
                                              const nlohmann::ordered_json& factor_spec) {
  const auto& b = s.basis();
  nlohmann::ordered_json j;
  j["version"] = kVersion;
  j["topology"] = to_string(s.topology());
  j["bandlimit"] = {b.bandlimit().mu, b.bandlimit().mv};
  j["sphere_basis"] = b.bandlimit().sphere == SphereBasis::harmonic ? "harmonic" : "latitude_legendre";
  j["factor"] = factor_spec;
  j["step"] = step;
  j["dt"] = dt;
  j["energy"] = detail::number(energy);
  j["coefficients"] = s.coefficients();
  return j;
}

struct Checkpoint {
  SpectralSurface surface;
  nlohmann::ordered_json factor;
  int step = 0;
  double dt = 0.0;
};

inline Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open checkpoint");
  nlohmann::ordered_json j;
  try {
    in >> j;
    const std::string topo = j.at("topology").get<std::string>();
    if (topo != "torus_like" && topo != "sphere_like") throw ConfigError(path + ":/topology", 0, "unknown topology");
    Bandlimit band{j.at("bandlimit").at(0).get<int>(), j.at("bandlimit").at(1).get<int>()};
    band.sphere = j.value("sphere_basis", std::string("harmonic")) == "latitude_legendre"
                      ? SphereBasis::latitude_legendre
                      : SphereBasis::harmonic;
    auto basis = std::make_shared<const SpectralBasis>(
        topo == "torus_like" ? Topology::torus_like : Topology::sphere_like, band);
    auto coeffs = j.at("coefficients").get<std::vector<std::vector<double>>>();
    return {SpectralSurface(basis, std::move(coeffs)), j.at("factor"), j.at("step").get<int>(),
            j.at("dt").get<double>()};
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path, 0, std::string("malformed checkpoint: ") + e.what());
  } catch (const ArityError& e) {
    throw ConfigError(path, 0, std::string("checkpoint does not match its bandlimit: ") + e.what());
  }
}

// Seconds since construction.
class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace csl
