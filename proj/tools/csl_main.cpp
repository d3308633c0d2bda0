#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "csl/cli.hpp"

namespace {

std::optional<csl::Vec2> pair_option(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  return csl::Vec2{v[0], v[1]};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conformal surface lab: geometry of surfaces in conformally flat space"};
  app.require_subcommand(1);
  app.fallthrough();

  csl::cli::GlobalOptions global;
  std::string config, out_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  auto* config_opt = app.add_option("--config", config, "JSON run configuration")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "random seed for sampled points and fields");
  auto* threads_opt = app.add_option("--threads", threads, "worker threads (default: CSL_THREADS, else 1)")
                          ->check(CLI::PositiveNumber);
  auto* out_opt = app.add_option("--out-dir", out_dir, "directory for reports, traces and checkpoints");

  // Options shared by commands that take one surface and one factor.
  std::string surface, factor;
  std::vector<int> grid;
  auto add_pair_options = [&](CLI::App* cmd) {
    cmd->add_option("--surface", surface, "surface: catalog kind, inline JSON or @file");
    cmd->add_option("--factor", factor, "conformal factor: catalog kind, inline JSON or @file");
    cmd->add_option("--grid", grid, "quadrature grid nu,nv")->expected(2)->delimiter(',');
  };

  bool catalog_json = false;
  auto* catalog = app.add_subcommand("catalog", "list the surface and factor catalogs");
  catalog->add_flag("--json", catalog_json, "machine-readable listing");

  std::vector<std::string> suites;
  std::string report;
  auto* check = app.add_subcommand("check", "run the verification suites and write the report");
  check->add_option("--suite", suites, "suites to run (repeatable; default: all)")
      ->check(CLI::IsMember(csl::known_suites()));
  check->add_option("--report", report, "report file name");
  check->add_option("--grid", grid, "quadrature grid nu,nv")->expected(2)->delimiter(',');

  csl::cli::IntegrateOptions integrate_opt;
  std::vector<std::string> integrand_list;
  auto* integrate = app.add_subcommand("integrate", "integrate geometric densities over surfaces");
  add_pair_options(integrate);
  integrate->add_option("--integrand", integrand_list, "integrands (repeatable; default: all)")
      ->check(CLI::IsMember(csl::cli::integrand_names()));
  integrate->add_option("--table", integrate_opt.table, "CSV table name");

  csl::cli::VaryOptions vary_opt;
  std::vector<double> at;
  auto* vary = app.add_subcommand("vary", "compare an analytic first variation with finite differences");
  add_pair_options(vary);
  vary->add_option("--f", vary_opt.speed, "normal speed f as an expression in u, v, x, y, z")->required();
  vary->add_option("--quantity", vary_opt.quantity, "varied quantity")
      ->required()
      ->check(CLI::IsMember({"lambda1", "lambda2", "H", "K", "area_element", "area", "total_H", "willmore",
                             "gauss_bonnet"}));
  vary->add_option("--at", at, "chart point u,v for pointwise quantities")->expected(2)->delimiter(',');
  vary->add_option("--report", vary_opt.report, "report file name");

  csl::cli::FlowOptions flow_opt;
  std::string initial, trace, checkpoint, sphere_basis;
  std::vector<int> bandlimit;
  double dt0 = 0, tol = 0;
  int max_steps = 0;
  bool no_filter = false;
  auto* flow = app.add_subcommand("flow", "run or resume Willmore gradient flow");
  flow->add_option("--surface", surface, "initial surface: catalog kind, inline JSON or @file");
  flow->add_option("--factor", factor, "conformal factor: catalog kind, inline JSON or @file");
  auto* initial_opt = flow->add_option("--initial", initial, "checkpoint to resume from")->check(CLI::ExistingFile);
  flow->get_option("--surface")->excludes(initial_opt);
  flow->get_option("--factor")->excludes(initial_opt);
  flow->add_option("--bandlimit", bandlimit, "spectral bandlimit mu,mv")->expected(2)->delimiter(',');
  flow->add_option("--sphere-basis", sphere_basis, "basis for sphere-like surfaces")
      ->check(CLI::IsMember({"harmonic", "latitude_legendre"}));
  auto* dt0_opt = flow->add_option("--dt0", dt0, "initial step (default from the residual scale)")
                      ->check(CLI::PositiveNumber);
  auto* tol_opt = flow->add_option("--tol", tol, "stop when the L2 norm of W is below this")->check(CLI::PositiveNumber);
  auto* steps_opt = flow->add_option("--max-steps", max_steps, "step budget")->check(CLI::NonNegativeNumber);
  flow->add_flag("--no-filter", no_filter, "disable the spectral filter");
  flow->add_option("--trace", trace, "trace CSV name");
  flow->add_option("--checkpoint", checkpoint, "checkpoint JSON name");
  flow->add_option("--checkpoint-every", flow_opt.checkpoint_every, "accepted steps between checkpoints")
      ->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*config_opt) global.config = config;
    if (*seed_opt) global.seed = seed;
    if (*threads_opt) global.threads = threads;
    if (*out_opt) global.out_dir = out_dir;

    if (*catalog) {
      std::cout << csl::cli::catalog_listing(catalog_json);
      return 0;
    }
    csl::RunConfig cfg = csl::cli::resolve(global);
    if (grid.size() == 2) {
      cfg.nu = grid[0];
      cfg.nv = grid[1];
    }
    if (*check) {
      if (!suites.empty()) cfg.suites = suites;
      if (!report.empty()) cfg.report = report;
      return csl::cli::check(cfg, std::cout);
    }
    if (!surface.empty() && !*flow) cfg.surfaces = {csl::cli::surface_argument(surface)};
    if (!factor.empty() && !*flow) cfg.factors = {csl::cli::factor_argument(factor)};
    if (*integrate) {
      if (!integrand_list.empty()) integrate_opt.integrands = integrand_list;
      return csl::cli::integrate(cfg, integrate_opt, std::cout);
    }
    if (*vary) {
      vary_opt.at = pair_option(at);
      return csl::cli::vary(cfg, vary_opt, std::cout);
    }
    auto& fs = cfg.flow;
    if (!surface.empty()) fs.surface = csl::cli::surface_argument(surface).spec;
    if (!factor.empty()) fs.factor = csl::cli::factor_argument(factor).spec;
    if (bandlimit.size() == 2) fs.band = {bandlimit[0], bandlimit[1], fs.band.sphere};
    if (sphere_basis == "harmonic") fs.band.sphere = csl::SphereBasis::harmonic;
    if (sphere_basis == "latitude_legendre") fs.band.sphere = csl::SphereBasis::latitude_legendre;
    if (*dt0_opt) fs.flow.dt0 = dt0;
    if (*tol_opt) fs.flow.tol = tol;
    if (*steps_opt) fs.flow.max_steps = max_steps;
    if (no_filter) fs.flow.filter = false;
    if (!trace.empty()) fs.trace = trace;
    if (!checkpoint.empty()) fs.checkpoint = checkpoint;
    if (*initial_opt) flow_opt.initial = initial;
    return csl::cli::flow(cfg, flow_opt, std::cout);
  } catch (const csl::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return csl::cli::kUsageError;
  } catch (const csl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
