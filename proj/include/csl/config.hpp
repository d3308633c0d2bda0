#pragma once

// JSON run configuration. Parsing is strict: unknown keys, wrong types and
// out-of-range values raise ConfigError carrying the JSON pointer and the
// source line of the offending value.

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "csl/ambient.hpp"
#include "csl/catalog.hpp"
#include "csl/errors.hpp"
#include "csl/flow.hpp"
#include "csl/spectral.hpp"
#include "csl/surface.hpp"

namespace csl {

using Json = nlohmann::ordered_json;

namespace detail {

inline std::string pointer_token(std::string_view key) {
  std::string out;
  for (char c : key) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

// JSON pointer -> line of the value it names. Only called on text that
// already parsed, so the scanner can assume well-formed input.
inline std::map<std::string, int> json_line_index(std::string_view text) {
  struct Level {
    bool object;
    std::string pointer;
    int index = 0;
    std::string key;
    bool expect_key;
  };
  std::map<std::string, int> lines;
  std::vector<Level> stack;
  int line = 1;
  auto here = [&] {
    if (stack.empty()) return std::string();
    const Level& l = stack.back();
    return l.pointer + "/" + (l.object ? pointer_token(l.key) : std::to_string(l.index));
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
    } else if (c == '{' || c == '[') {
      const std::string p = here();
      lines.emplace(p, line);
      stack.push_back({c == '{', p, 0, "", c == '{'});
    } else if (c == '}' || c == ']') {
      stack.pop_back();
    } else if (c == ',') {
      if (stack.back().object) stack.back().expect_key = true;
      else ++stack.back().index;
    } else if (c == ':') {
      stack.back().expect_key = false;
    } else if (c == '"') {
      std::string s;
      for (++i; i < text.size() && text[i] != '"'; ++i) {
        if (text[i] == '\\') ++i;
        s += text[i];
      }
      if (!stack.empty() && stack.back().object && stack.back().expect_key) stack.back().key = s;
      else lines.emplace(here(), line);
    } else if (c != ' ' && c != '\t' && c != '\r') {
      lines.emplace(here(), line);
      while (i + 1 < text.size() && std::string_view(",}] \t\r\n").find(text[i + 1]) == std::string_view::npos) ++i;
    }
  }
  return lines;
}

}  // namespace detail

// A value inside a parsed config, with enough context to report errors.
class ConfigNode {
 public:
  ConfigNode(const Json* value, std::string pointer, const std::map<std::string, int>* lines)
      : value_(value), pointer_(std::move(pointer)), lines_(lines) {}

  const Json& json() const { return *value_; }
  const std::string& pointer() const { return pointer_; }

  [[noreturn]] void fail(const std::string& message) const {
    int line = 0;
    if (lines_) {
      // Missing keys report the line of the enclosing object.
      std::string p = pointer_;
      for (;;) {
        auto it = lines_->find(p);
        if (it != lines_->end()) {
          line = it->second;
          break;
        }
        if (p.empty()) break;
        p.erase(p.rfind('/'));
      }
    }
    throw ConfigError(pointer_.empty() ? "/" : pointer_, line, message);
  }

  std::optional<ConfigNode> find(const std::string& key) const {
    require_object();
    auto it = value_->find(key);
    if (it == value_->end()) return std::nullopt;
    return ConfigNode(&*it, pointer_ + "/" + detail::pointer_token(key), lines_);
  }
  ConfigNode at(const std::string& key) const {
    auto n = find(key);
    if (!n) ConfigNode(value_, pointer_ + "/" + detail::pointer_token(key), lines_).fail("required key is missing");
    return *n;
  }
  ConfigNode operator[](std::size_t i) const {
    return {&value_->at(i), pointer_ + "/" + std::to_string(i), lines_};
  }
  std::size_t size() const { return value_->size(); }

  void require_object() const {
    if (!value_->is_object()) fail("expected an object");
  }
  void require_array() const {
    if (!value_->is_array()) fail("expected an array");
  }
  void allow_keys(std::initializer_list<std::string_view> keys) const {
    require_object();
    for (const auto& [k, v] : value_->items()) {
      bool known = false;
      for (auto a : keys) known = known || a == k;
      if (!known) ConfigNode(&v, pointer_ + "/" + detail::pointer_token(k), lines_).fail("unknown key '" + k + "'");
    }
  }

  double number() const {
    if (!value_->is_number()) fail("expected a number");
    return value_->get<double>();
  }
  double positive() const {
    const double v = number();
    if (!(v > 0.0)) fail("expected a positive number");
    return v;
  }
  long long integer() const {
    if (!value_->is_number_integer()) fail("expected an integer");
    return value_->get<long long>();
  }
  int integer_in(long long lo, long long hi) const {
    const long long v = integer();
    if (v < lo || v > hi) fail("expected an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return static_cast<int>(v);
  }
  bool boolean() const {
    if (!value_->is_boolean()) fail("expected true or false");
    return value_->get<bool>();
  }
  std::string string() const {
    if (!value_->is_string()) fail("expected a string");
    return value_->get<std::string>();
  }
  Vec3 vec3() const {
    if (!value_->is_array() || value_->size() != 3) fail("expected an array of three numbers");
    return {(*this)[0].number(), (*this)[1].number(), (*this)[2].number()};
  }

  double number_or(const std::string& key, double fallback) const {
    auto n = find(key);
    return n ? n->number() : fallback;
  }

 private:
  const Json* value_;
  std::string pointer_;
  const std::map<std::string, int>* lines_;
};

// ---------------------------------------------------------------------------
// Catalog specs.

inline Orientation parse_orientation(const ConfigNode& n) {
  const std::string s = n.string();
  if (s == "inward") return Orientation::inward;
  if (s == "outward") return Orientation::outward;
  if (s == "chart") return Orientation::chart;
  n.fail("orientation must be inward, outward or chart");
}

inline ClosedSurface parse_surface(const ConfigNode& n) {
  n.require_object();
  const std::string kind = n.at("kind").string();
  const auto o = n.find("orientation") ? parse_orientation(n.at("orientation")) : Orientation::inward;
  try {
    if (kind == "sphere") {
      n.allow_keys({"kind", "orientation", "r", "center"});
      const auto c = n.find("center");
      return make_sphere(n.find("r") ? n.at("r").positive() : 1.0, c ? c->vec3() : Vec3{0, 0, 0}, o);
    }
    if (kind == "ellipsoid") {
      n.allow_keys({"kind", "orientation", "a", "b", "c"});
      return make_ellipsoid(n.at("a").positive(), n.at("b").positive(), n.at("c").positive(), o);
    }
    if (kind == "perturbed_sphere") {
      n.allow_keys({"kind", "orientation", "r", "eps", "mode"});
      const auto mode = n.at("mode");
      mode.allow_keys({"m", "p"});
      return make_perturbed_sphere(n.at("r").positive(), n.at("eps").number(), mode.at("m").integer_in(0, 64),
                                   mode.at("p").integer_in(0, 64), o);
    }
    if (kind == "torus") {
      n.allow_keys({"kind", "orientation", "R", "r"});
      const double R = n.at("R").positive(), r = n.at("r").positive();
      if (r >= R) n.at("r").fail("tube radius must be below the core radius");
      return make_torus(R, r, o);
    }
    if (kind == "clifford_torus") {
      n.allow_keys({"kind", "orientation", "r"});
      return make_clifford_torus(n.find("r") ? n.at("r").positive() : 1.0, o);
    }
    if (kind == "perturbed_torus") {
      n.allow_keys({"kind", "orientation", "R", "r", "eps", "mode"});
      const auto mode = n.at("mode");
      mode.allow_keys({"mu", "mv"});
      return make_perturbed_torus(n.at("R").positive(), n.at("r").positive(), n.at("eps").number(),
                                  mode.at("mu").integer_in(0, 64), mode.at("mv").integer_in(0, 64), o);
    }
    if (kind == "custom") {
      n.allow_keys({"kind", "orientation", "topology", "x", "y", "z", "domain"});
      const std::string t = n.at("topology").string();
      if (t != "sphere_like" && t != "torus_like") n.at("topology").fail("topology must be sphere_like or torus_like");
      std::optional<ChartDomain> d;
      if (auto dn = n.find("domain")) {
        if (!dn->json().is_array() || dn->size() != 2) dn->fail("expected [[u0, u1], [v0, v1]]");
        auto pair = [](const ConfigNode& p) {
          if (!p.json().is_array() || p.size() != 2) p.fail("expected [lo, hi]");
          const double lo = p[0].number(), hi = p[1].number();
          if (!(hi > lo)) p.fail("interval must have hi > lo");
          return std::array<double, 2>{lo, hi};
        };
        d = ChartDomain{pair((*dn)[0]), pair((*dn)[1])};
      }
      return make_custom(t == "sphere_like" ? Topology::sphere_like : Topology::torus_like, n.at("x").string(),
                         n.at("y").string(), n.at("z").string(), d, o);
    }
  } catch (const SyntaxError& e) {
    n.fail(std::string("bad expression: ") + e.what());
  }
  n.at("kind").fail("unknown surface kind '" + kind + "'");
}

inline ConformalFactor parse_factor(const ConfigNode& n) {
  n.require_object();
  const std::string kind = n.at("kind").string();
  try {
    if (kind == "flat") {
      n.allow_keys({"kind"});
      return flat_factor();
    }
    if (kind == "expr") {
      n.allow_keys({"kind", "sigma", "harmonic_intent"});
      return factor_from_sigma(n.at("sigma").string(), n.find("harmonic_intent") && n.at("harmonic_intent").boolean());
    }
    if (kind == "harmonic_potential") {
      n.allow_keys({"kind", "h"});
      return harmonic_factor_from_potential(parse_field(n.at("h").string(), ambient_variables()));
    }
    if (kind == "linear_harmonic") {
      n.allow_keys({"kind", "a"});
      return linear_harmonic_factor(n.at("a").number());
    }
    if (kind == "point_source") {
      n.allow_keys({"kind", "q", "p"});
      const auto p = n.find("p");
      return point_source_factor(n.number_or("q", 1.0), p ? p->vec3() : Vec3{3, 0, 0});
    }
    if (kind == "azimuthal") {
      n.allow_keys({"kind", "A"});
      return azimuthal_factor(n.at("A").number());
    }
  } catch (const SyntaxError& e) {
    n.fail(std::string("bad expression: ") + e.what());
  }
  n.at("kind").fail("unknown factor kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Run configuration.

struct SurfaceEntry {
  Json spec;
  ClosedSurface surface;
};

struct FactorEntry {
  Json spec;
  ConformalFactor factor;
};

struct Tolerances {
  double curvature = 1e-9;     // transformed against direct ambient curvature, relative
  double pointwise = 1e-8;     // pointwise surface identities
  double integral = 1e-6;      // integral identities
  double variation = 1e-6;     // FD against analytic variations
  double harmonicity = 1e-9;
};

struct FlowSettings {
  Json surface{{"kind", "perturbed_torus"}, {"R", 1.4142135623730951}, {"r", 1.0}, {"eps", 0.03},
               {"mode", {{"mu", 2}, {"mv", 1}}}};
  Json factor{{"kind", "flat"}};
  Bandlimit band{16, 16};
  FlowConfig flow;
  std::string trace = "flow_trace.csv";
  std::string checkpoint = "flow_checkpoint.json";
};

inline const std::vector<std::string>& known_suites() {
  static const std::vector<std::string> s{"ambient", "surface", "quadrature", "variation", "theorems"};
  return s;
}

struct RunConfig {
  std::vector<SurfaceEntry> surfaces;
  std::vector<FactorEntry> factors;
  int nu = 128, nv = 128;
  int order = 4;  // jet order; the Willmore residual needs 4
  Tolerances tolerances;
  std::vector<std::string> suites = known_suites();
  std::uint64_t seed = 1;
  int samples = 12;  // random points / fields per pointwise check
  std::string out_dir = "csl-out";
  std::string report = "suite_report.json";
  FlowSettings flow;

  // Normalized config with every default filled in, echoed in reports.
  Json echo() const {
    Json j;
    j["surfaces"] = Json::array();
    for (const auto& s : surfaces) j["surfaces"].push_back(s.spec);
    j["factors"] = Json::array();
    for (const auto& f : factors) j["factors"].push_back(f.spec);
    j["grid"] = {{"nu", nu}, {"nv", nv}};
    j["order"] = order;
    j["tolerances"] = {{"curvature", tolerances.curvature},
                       {"pointwise", tolerances.pointwise},
                       {"integral", tolerances.integral},
                       {"variation", tolerances.variation},
                       {"harmonicity", tolerances.harmonicity}};
    j["suites"] = suites;
    j["seed"] = seed;
    j["samples"] = samples;
    j["out_dir"] = out_dir;
    j["report"] = report;
    const auto& fc = flow.flow;
    j["flow"] = {{"surface", flow.surface},
                 {"factor", flow.factor},
                 {"bandlimit", {flow.band.mu, flow.band.mv}},
                 {"sphere_basis", flow.band.sphere == SphereBasis::harmonic ? "harmonic" : "latitude_legendre"},
                 {"dt0", fc.dt0},
                 {"tol", fc.tol},
                 {"max_steps", fc.max_steps},
                 {"filter", fc.filter},
                 {"smoothing_length", fc.smoothing_length},
                 {"trace", flow.trace},
                 {"checkpoint", flow.checkpoint}};
    return j;
  }
};

inline std::vector<SurfaceEntry> default_surfaces() {
  const Json sphere{{"kind", "sphere"}, {"r", 1.0}}, torus{{"kind", "torus"}, {"R", 2.0}, {"r", 0.5}};
  return {{sphere, make_sphere(1.0)}, {torus, make_torus(2.0, 0.5)}};
}

inline std::vector<FactorEntry> default_factors() {
  const Json flat{{"kind", "flat"}}, linear{{"kind", "linear_harmonic"}, {"a", 0.3}},
      point{{"kind", "point_source"}, {"q", 1.0}, {"p", {1.0, 1.0, 2.5}}};
  return {{flat, flat_factor()}, {linear, linear_harmonic_factor(0.3)}, {point, point_source_factor(1.0, {1, 1, 2.5})}};
}

inline RunConfig default_config() {
  RunConfig c;
  c.surfaces = default_surfaces();
  c.factors = default_factors();
  return c;
}

inline FlowSettings parse_flow_settings(const ConfigNode& n) {
  FlowSettings s;
  n.allow_keys({"surface", "factor", "bandlimit", "sphere_basis", "dt0", "tol", "max_steps", "filter",
                "smoothing_length", "trace", "checkpoint"});
  if (auto x = n.find("surface")) {
    parse_surface(*x);
    s.surface = x->json();
  }
  if (auto x = n.find("factor")) {
    parse_factor(*x);
    s.factor = x->json();
  }
  if (auto x = n.find("bandlimit")) {
    if (!x->json().is_array() || x->size() != 2) x->fail("expected [mu, mv]");
    s.band.mu = (*x)[0].integer_in(1, 64);
    s.band.mv = (*x)[1].integer_in(1, 64);
  }
  if (auto x = n.find("sphere_basis")) {
    const auto b = x->string();
    if (b == "harmonic") s.band.sphere = SphereBasis::harmonic;
    else if (b == "latitude_legendre") s.band.sphere = SphereBasis::latitude_legendre;
    else x->fail("sphere_basis must be harmonic or latitude_legendre");
  }
  if (auto x = n.find("dt0")) {
    s.flow.dt0 = x->number();
    if (s.flow.dt0 < 0) x->fail("dt0 must be >= 0 (0 picks the default)");
  }
  if (auto x = n.find("tol")) s.flow.tol = x->positive();
  if (auto x = n.find("max_steps")) s.flow.max_steps = x->integer_in(0, 10000000);
  if (auto x = n.find("filter")) s.flow.filter = x->boolean();
  if (auto x = n.find("smoothing_length")) {
    s.flow.smoothing_length = x->number();
    if (s.flow.smoothing_length < 0) x->fail("smoothing_length must be >= 0");
  }
  if (auto x = n.find("trace")) s.trace = x->string();
  if (auto x = n.find("checkpoint")) s.checkpoint = x->string();
  return s;
}

// Fields absent from the JSON keep the defaults of default_config().
inline RunConfig parse_config(std::string_view text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    int line = 1;
    for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i) line += text[i] == '\n';
    throw ConfigError("", line, std::string("malformed JSON: ") + e.what());
  }
  const auto lines = detail::json_line_index(text);
  const ConfigNode n(&root, "", &lines);
  n.allow_keys({"surfaces", "factors", "grid", "order", "tolerances", "suites", "seed", "samples", "out_dir", "report",
                "flow"});
  RunConfig c = default_config();
  if (auto s = n.find("surfaces")) {
    s->require_array();
    c.surfaces.clear();
    for (std::size_t i = 0; i < s->size(); ++i) c.surfaces.push_back({(*s)[i].json(), parse_surface((*s)[i])});
  }
  if (auto f = n.find("factors")) {
    f->require_array();
    c.factors.clear();
    for (std::size_t i = 0; i < f->size(); ++i) c.factors.push_back({(*f)[i].json(), parse_factor((*f)[i])});
  }
  if (auto g = n.find("grid")) {
    g->allow_keys({"nu", "nv"});
    if (auto x = g->find("nu")) c.nu = x->integer_in(4, 4096);
    if (auto x = g->find("nv")) c.nv = x->integer_in(4, 4096);
  }
  if (auto x = n.find("order")) c.order = x->integer_in(4, kMaxJetOrder);
  if (auto t = n.find("tolerances")) {
    t->allow_keys({"curvature", "pointwise", "integral", "variation", "harmonicity"});
    if (auto x = t->find("curvature")) c.tolerances.curvature = x->positive();
    if (auto x = t->find("pointwise")) c.tolerances.pointwise = x->positive();
    if (auto x = t->find("integral")) c.tolerances.integral = x->positive();
    if (auto x = t->find("variation")) c.tolerances.variation = x->positive();
    if (auto x = t->find("harmonicity")) c.tolerances.harmonicity = x->positive();
  }
  if (auto s = n.find("suites")) {
    s->require_array();
    c.suites.clear();
    for (std::size_t i = 0; i < s->size(); ++i) {
      const auto name = (*s)[i].string();
      const auto& k = known_suites();
      if (std::find(k.begin(), k.end(), name) == k.end())
        (*s)[i].fail("unknown suite '" + name + "'; expected ambient, surface, quadrature, variation or theorems");
      c.suites.push_back(name);
    }
  }
  if (auto x = n.find("seed")) {
    if (!x->json().is_number_unsigned()) x->fail("expected a non-negative integer");
    c.seed = x->json().get<std::uint64_t>();
  }
  if (auto x = n.find("samples")) c.samples = x->integer_in(1, 10000);
  if (auto x = n.find("out_dir")) c.out_dir = x->string();
  if (auto x = n.find("report")) c.report = x->string();
  if (auto x = n.find("flow")) c.flow = parse_flow_settings(*x);
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ":" + e.path(), e.line(), e.message());
  }
}

// Surface or factor from a standalone JSON spec (CLI flags).
inline ClosedSurface surface_from_json(const Json& j) {
  const auto lines = std::map<std::string, int>{};
  return parse_surface(ConfigNode(&j, "", &lines));
}
inline ConformalFactor factor_from_json(const Json& j) {
  const auto lines = std::map<std::string, int>{};
  return parse_factor(ConfigNode(&j, "", &lines));
}

}  // namespace csl
