// ckn: command-line front end for the weighted-inequality library.
//
// Output goes to stdout (JSON or CSV); files named by --out / --trace are written
// to a temporary name first and renamed into place once complete.
// Exit codes: 0 success, 1 numerical failure, 2 argument or domain error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>

#include "ckn/discretization/snapshot.hpp"
#include "ckn/flow.hpp"
#include "ckn/identities.hpp"
#include "ckn/minimize.hpp"
#include "ckn/spectrum.hpp"
#include "json_out.hpp"

namespace {

using namespace ckn;
using cli::Json;

/// Settings shared by the subcommands. Zero means "module default".
struct RunConfig {
  std::size_t nz = 0;
  std::size_t nmu = 0;
  std::size_t nphi = 0;
  std::size_t ns = 0;
  double z = 0.0;  // truncation half length
  double h = 0.0;  // flow log-step
  double rel_tol = 1e-12;
  double grad_tol = 1e-6;
  int max_iterations = 20000;
  int max_degree = -1;
  double theta = 1.0;
  std::uint64_t seed = 1;
  std::string out;
  std::string trace;

  void validate() const {
    if (!(rel_tol > 0.0) || !(grad_tol > 0.0)) throw DomainError("config: tolerances must be positive");
    if (max_iterations <= 0) throw DomainError("config: max_iterations must be positive");
    if (z < 0.0 || h < 0.0) throw DomainError("config: z and log_step must be non-negative");
    if (!(theta >= 0.5 && theta <= 1.0)) throw DomainError("config: theta must lie in [1/2, 1]");
  }
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

template <class T>
T parse_value(const std::string& key, const std::string& text) {
  std::istringstream is(text);
  T v{};
  if (!(is >> v) || !(is >> std::ws).eof()) throw DomainError("config: bad value for " + key + ": '" + text + "'");
  return v;
}

std::size_t parse_resolution(const std::string& key, const std::string& text) {
  const auto v = parse_value<long long>(key, text);
  if (v <= 0) throw DomainError("config: " + key + " must be a positive resolution");
  return static_cast<std::size_t>(v);
}

void set_key(RunConfig& c, const std::string& key, const std::string& val) {
  if (key == "nz") c.nz = parse_resolution(key, val);
  else if (key == "nmu") c.nmu = parse_resolution(key, val);
  else if (key == "nphi") c.nphi = parse_resolution(key, val);
  else if (key == "ns") c.ns = parse_resolution(key, val);
  else if (key == "z") c.z = parse_value<double>(key, val);
  else if (key == "log_step") c.h = parse_value<double>(key, val);
  else if (key == "rel_tol") c.rel_tol = parse_value<double>(key, val);
  else if (key == "grad_tol") c.grad_tol = parse_value<double>(key, val);
  else if (key == "max_iterations") c.max_iterations = parse_value<int>(key, val);
  else if (key == "max_degree") c.max_degree = parse_value<int>(key, val);
  else if (key == "theta") c.theta = parse_value<double>(key, val);
  else if (key == "seed") c.seed = parse_value<std::uint64_t>(key, val);
  else if (key == "out") c.out = val;
  else if (key == "trace") c.trace = val;
  else throw DomainError("config: unknown key '" + key + "'");
}

void read_config(RunConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("config: cannot open " + path);
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DomainError("config: line " + std::to_string(no) + " is not key=value");
    std::string key = trim(line.substr(0, eq));
    for (char& ch : key)
      if (ch == '-') ch = '_';
    set_key(c, key, trim(line.substr(eq + 1)));
  }
}

void write_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DomainError("cannot open " + tmp + " for writing");
    out << text;
    if (!out.flush()) throw NumericalError("write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw DomainError("cannot rename to " + path + ": " + ec.message());
  }
}

Json params_json(const DerivedParams& dp) {
  return Json{{"d", dp.d}, {"a", dp.a}, {"b", dp.b}, {"lambda", dp.lambda}, {"p", dp.p}, {"n", dp.n}, {"alpha", dp.alpha}};
}

Json report_json(const IdentityReport& r, std::uint64_t seed) {
  Json terms = Json::object();
  for (const auto& [k, v] : r.term_breakdown) terms[k] = v;
  const double scale = std::max({std::abs(r.lhs), std::abs(r.rhs)});
  return Json{{"name", r.name},   {"seed", seed},
              {"lhs", r.lhs},     {"rhs", r.rhs},
              {"residual", r.residual}, {"relative", scale > 0.0 ? r.residual / scale : 0.0},
              {"term_breakdown", terms}};
}

struct Context {
  RunConfig cfg;
  int indent = 2;
  bool quiet = false;

  void print(const Json& j) const { std::cout << cli::to_text(j, indent) << '\n'; }
  void note(const std::string& msg) const {
    if (!quiet) std::cerr << msg << '\n';
  }
};

// ---------------------------------------------------------------------------
// Subcommands

struct ParamArgs {
  int d = 3;
  double a = 0.0, b = 0.0;
  void add(CLI::App* app, bool required = true) {
    auto* od = app->add_option("--d", d, "dimension");
    auto* oa = app->add_option("--a", a, "weight exponent a");
    auto* ob = app->add_option("--b", b, "weight exponent b");
    if (required) {
      od->required();
      oa->required();
      ob->required();
    }
  }
  DerivedParams derived() const { return derive({d, a, b}); }
};

void cmd_derive(const Context& ctx, const ParamArgs& pa) {
  const auto dp = pa.derived();
  ctx.print(Json{{"d", dp.d},
                 {"a", dp.a},
                 {"b", dp.b},
                 {"a_c", dp.a_c},
                 {"p", dp.p},
                 {"n", dp.n},
                 {"lambda", dp.lambda},
                 {"alpha", dp.alpha},
                 {"alpha_fs", dp.alpha_fs},
                 {"lambda_fs", dp.lambda_fs},
                 {"b_fs", dp.b_fs_at_a},
                 {"region", to_string(dp.region)}});
}

void cmd_curve(int d, double a_min, double a_max, int samples) {
  if (samples < 2) throw DomainError("curve: --samples must be at least 2");
  if (!(a_max > a_min)) throw DomainError("curve: requires a-min < a-max");
  std::string out = "a,b_fs\n";
  char buf[80];
  for (int k = 0; k < samples; ++k) {
    const double a = k + 1 == samples ? a_max : a_min + (a_max - a_min) * k / (samples - 1.0);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", a, b_fs(d, a));
    out += buf;
  }
  std::cout << out;
}

void cmd_radial_constant(const Context& ctx, const ParamArgs& pa) {
  const auto dp = pa.derived();
  auto j = params_json(dp);
  j["radial_constant"] = radial_constant(dp);
  j["line_quotient"] = radial_line_quotient(dp.lambda, dp.p);
  ctx.print(j);
}

MinimizeOptions minimize_options(const RunConfig& c) {
  MinimizeOptions o;
  o.max_iterations = c.max_iterations;
  o.rel_tol = c.rel_tol;
  o.grad_tol = c.grad_tol;
  o.max_degree = c.max_degree;
  return o;
}

std::shared_ptr<const CylinderGrid> cylinder_grid(const DerivedParams& dp, const RunConfig& c, bool radial) {
  SphereGrid sph = SphereGrid::point(dp.d);
  if (!radial) {
    if (dp.d == 3) sph = SphereGrid::gauss_legendre(c.nmu ? c.nmu : 12, c.nphi ? c.nphi : 24);
    else if (dp.d == 2) sph = SphereGrid::circle(c.nphi ? c.nphi : 32);
    else sph = minimize_sphere(dp.d);  // throws: no sphere calculus
  }
  const auto def = minimize_grid(dp, sph);
  if (!c.nz && !(c.z > 0.0)) return def;
  return CylinderGrid::make(c.z > 0.0 ? c.z : def->half_length(), c.nz ? c.nz : def->line.size(), std::move(sph));
}

void cmd_minimize(const Context& ctx, const ParamArgs& pa, bool radial_only, const std::string& init) {
  const auto dp = pa.derived();
  const auto preset = parse_init_preset(init);
  const auto grid = cylinder_grid(dp, ctx.cfg, radial_only);
  const auto res = minimize_quotient(dp, grid, radial_only ? Restriction::Radial : Restriction::Full, preset,
                                     minimize_options(ctx.cfg));
  if (!res.converged) ctx.note("minimize: iteration cap reached before convergence");
  auto j = params_json(dp);
  j["restriction"] = to_string(res.restriction);
  j["init"] = to_string(preset);
  j["constant"] = res.constant;
  j["radial_constant"] = radial_constant(dp);
  j["iterations"] = res.iterations;
  j["converged"] = res.converged;
  j["gradient_norm"] = res.gradient_norm;
  j["max_degree"] = res.max_degree;
  j["angular_oscillation"] = angular_oscillation(res.minimizer);
  j["grid"] = Json{{"nz", grid->line.size()}, {"z", grid->half_length()}, {"sphere", grid->sphere.descriptor()}};
  j["snapshot"] = ctx.cfg.out.empty() ? Json(nullptr) : Json(ctx.cfg.out);
  if (!ctx.cfg.out.empty()) {
    std::ostringstream os;
    write_snapshot(os, to_snapshot(res.minimizer, cli::to_text(params_json(dp), -1)));
    write_atomic(ctx.cfg.out, os.str());
    ctx.note("snapshot written to " + ctx.cfg.out);
  }
  ctx.print(j);
}

void cmd_detect_breaking(const Context& ctx, const ParamArgs& pa) {
  const auto dp = pa.derived();
  const auto r = detect_breaking(dp, cylinder_grid(dp, ctx.cfg, false), minimize_options(ctx.cfg));
  if (!r.converged) ctx.note("detect-breaking: a minimisation hit the iteration cap");
  auto j = params_json(dp);
  j["lambda_fs"] = dp.lambda_fs;
  j["radial_constant"] = r.radial_constant;
  j["radial_quadrature"] = r.radial_quadrature;
  j["full_constant"] = r.full_constant;
  j["gap"] = r.gap;
  j["broken"] = r.broken;
  j["region"] = to_string(r.region);
  j["agrees"] = r.agrees;
  j["converged"] = r.converged;
  ctx.print(j);
}

double closed_form_threshold(int d, double p, int ell) { return 4.0 * ell * (ell + d - 2.0) / (p * p - 4.0); }

void cmd_spectrum(const Context& ctx, int d, double p, int lmax, double lambda, bool with_eigenfunctions) {
  if (lmax < 0) throw DomainError("spectrum: --lmax must be non-negative");
  if (!(lambda > 0.0)) lambda = lambda_fs(d, p);
  const std::size_t nz = ctx.cfg.nz ? ctx.cfg.nz : 4000;
  Json modes = Json::array();
  for (int ell = 0; ell <= lmax; ++ell) {
    const auto r = lowest_eigenvalue({lambda, p, d, ell, ctx.cfg.z, nz});
    Json m{{"ell", r.ell}, {"lowest_eigenvalue", r.lowest_eigenvalue}, {"essential_edge", r.essential_edge}};
    m["threshold_lambda"] = ell == 0 ? Json(nullptr) : Json(threshold_lambda(d, p, ell, nz));
    if (with_eigenfunctions) {
      m["z"] = r.z;
      m["eigenfunction"] = r.eigenfunction;
    }
    modes.push_back(std::move(m));
  }
  ctx.print(Json{{"d", d}, {"p", p}, {"lambda", lambda}, {"nz", nz}, {"modes", modes}});
}

void cmd_threshold(const Context& ctx, int d, double p, int ell) {
  if (ell < 1) throw DomainError("threshold: --ell must be at least 1");
  const double t = threshold_lambda(d, p, ell, ctx.cfg.nz ? ctx.cfg.nz : 4000);
  const double c = closed_form_threshold(d, p, ell);
  ctx.print(Json{{"d", d}, {"p", p}, {"ell", ell}, {"threshold", t}, {"closed_form", c},
                 {"relative_mismatch", std::abs(t - c) / c}});
}

void cmd_sphere_threshold(const Context& ctx, int d, double p) {
  const auto r = sphere_bifurcation(d, p);
  ctx.print(Json{{"d", d}, {"p", p}, {"analytic", r.analytic}, {"eigen_condition", r.eigen_condition},
                 {"relative_mismatch", std::abs(r.eigen_condition - r.analytic) / r.analytic}});
}

std::shared_ptr<const RadialGrid> radial_flow_grid(const DerivedParams& dp, const RunConfig& c) {
  const auto g = flow_grid(dp, c.h);
  if (!c.ns) return g;
  return RadialGrid::make(g->s_min(), g->s_max(), c.ns, g->sphere, g->n, g->alpha);
}

void cmd_flow(const Context& ctx, const ParamArgs& pa, double t_end, double dt, const std::string& init) {
  const auto dp = pa.derived();
  const auto g = radial_flow_grid(dp, ctx.cfg);
  RadialField v0(g);
  if (init == "perturbed") {
    std::mt19937_64 rng(ctx.cfg.seed);
    v0 = perturbed_optimizer(g, dp, rng).map([p = dp.p](double x) { return std::pow(x, p); });
  } else if (init == "optimizer") {
    v0 = sample_radial(g, normalized_radial(dp)).map([p = dp.p](double x) { return std::pow(x, p); });
  } else if (init == "self-similar") {
    const SelfSimilar ss{1.0, dp.n, dp.alpha};
    v0 = sample<RadialGrid>(g, [&](double z, std::size_t) { return eval_self_similar(ss, 1.0, std::exp(z)); });
  } else {
    throw DomainError("flow: unknown init preset '" + init + "' (perturbed, optimizer, self-similar)");
  }
  FlowOptions opt;
  opt.theta = ctx.cfg.theta;
  const auto tr = run(v0, dp, t_end, dt, opt);
  const std::string csv = trace_csv(tr);
  if (!ctx.cfg.out.empty()) {
    auto pj = params_json(dp);
    pj["s_min"] = g->s_min();
    pj["s_max"] = g->s_max();
    pj["t"] = tr.final_state.t;
    Snapshot snap{g->dim(), g->line.size(), g->line.end(), g->sphere.descriptor(), cli::to_text(pj, -1),
                  tr.final_state.v.data()};
    std::ostringstream os;
    write_snapshot(os, snap);
    write_atomic(ctx.cfg.out, os.str());
    ctx.note("final state written to " + ctx.cfg.out);
  }
  if (ctx.cfg.trace.empty()) {
    std::cout << csv;
    return;
  }
  write_atomic(ctx.cfg.trace, csv);
  auto j = params_json(dp);
  j["init"] = init;
  j["steps"] = tr.times.size() - 1;
  j["J_initial"] = tr.J.front();
  j["J_final"] = tr.J.back();
  j["monotone"] = tr.monotone;
  j["dJdt_at_0"] = tr.dJdt_at_0;
  j["relative_mass_drift"] = (tr.mass.back() - tr.mass.front()) / tr.mass.front();
  j["max_boundary_flux"] = tr.max_boundary_flux;
  j["halvings"] = tr.halvings;
  j["trace"] = ctx.cfg.trace;
  ctx.print(j);
}

void cmd_verify(const Context& ctx, const std::string& suite, int seeds, const ParamArgs& pa) {
  if (seeds < 1) throw DomainError("verify: --seeds must be at least 1");
  const auto dp = pa.derived();
  Json out = Json::array();
  std::function<IdentityReport(std::mt19937_64&)> one;
  if (suite == "lemma-first") {
    auto sph = dp.d == 3 ? SphereGrid::gauss_legendre(ctx.cfg.nmu ? ctx.cfg.nmu : 12, ctx.cfg.nphi ? ctx.cfg.nphi : 24)
                         : SphereGrid::point(dp.d);
    auto g = RadialGrid::make(0.3, 3.0, ctx.cfg.ns ? ctx.cfg.ns : 401, std::move(sph), dp.n, dp.alpha);
    one = [g, dp](std::mt19937_64& rng) { return lemma_first_residual(random_pressure_field(g, 4, rng), dp); };
  } else if (suite == "lemma-second") {
    if (dp.d != 3) throw DomainError("verify lemma-second: runs on S^2, needs d = 3");
    auto g = std::make_shared<const SphereGrid>(
        SphereGrid::gauss_legendre(ctx.cfg.nmu ? ctx.cfg.nmu : 64, ctx.cfg.nphi ? ctx.cfg.nphi : 128));
    one = [g, dp](std::mt19937_64& rng) { return lemma_second_check(random_sphere_field(g, 6, rng), dp.n, dp.alpha); };
  } else if (suite == "bochner") {
    auto g = std::make_shared<const SphereGrid>(
        SphereGrid::gauss_legendre(ctx.cfg.nmu ? ctx.cfg.nmu : 24, ctx.cfg.nphi ? ctx.cfg.nphi : 48));
    one = [g](std::mt19937_64& rng) { return bochner_residual(random_sphere_field(g, 8, rng)); };
  } else if (suite == "sobolev-hessian") {
    auto g = BoxGrid::make(3, ctx.cfg.z > 0.0 ? ctx.cfg.z : 3.0, ctx.cfg.ns ? ctx.cfg.ns : 161);
    one = [g](std::mt19937_64& rng) { return sobolev_hessian_decomposition(random_box_pressure(g, rng), 3); };
  } else if (suite == "djdt") {
    auto g = radial_flow_grid(dp, ctx.cfg);
    one = [g, dp](std::mt19937_64& rng) {
      const auto r = dJdt_identity(perturbed_optimizer(g, dp, rng), dp);
      return IdentityReport{"dJdt", r.lhs, r.rhs, std::abs(r.lhs - r.rhs),
                            {{"mismatch", r.mismatch}, {"scale", r.scale}, {"integral", r.integral}}};
    };
  } else {
    throw DomainError("verify: unknown suite '" + suite + "'");
  }
  for (int k = 0; k < seeds; ++k) {
    const std::uint64_t seed = ctx.cfg.seed + static_cast<std::uint64_t>(k);
    std::mt19937_64 rng(seed);
    out.push_back(report_json(one(rng), seed));
  }
  ctx.print(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Caffarelli-Kohn-Nirenberg weighted inequalities: parameters, optimizers, spectra, flow"};
  app.require_subcommand(1);
  app.fallthrough();

  Context ctx;
  std::string config_path;
  RunConfig flags;
  app.add_option("--config", config_path, "key=value file overriding built-in defaults");
  app.add_option("--json-indent", ctx.indent, "JSON indentation (negative: single line)");
  app.add_flag("--quiet", ctx.quiet, "suppress notes on standard error");

  // Flags that override config keys of the same name; applied only when given.
  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> overrides;
  auto over = [&](const std::string& name, auto RunConfig::*member, const std::string& help) {
    auto* o = app.add_option(name, flags.*member, help);
    overrides.emplace_back(o, [member, &flags](RunConfig& c) { c.*member = flags.*member; });
    return o;
  };
  over("--nz", &RunConfig::nz, "line nodes")->check(CLI::PositiveNumber);
  over("--nmu", &RunConfig::nmu, "polar nodes on S^2")->check(CLI::PositiveNumber);
  over("--nphi", &RunConfig::nphi, "azimuthal nodes")->check(CLI::PositiveNumber);
  over("--ns", &RunConfig::ns, "radial or box nodes")->check(CLI::PositiveNumber);
  over("--z", &RunConfig::z, "truncation half length");
  over("--log-step", &RunConfig::h, "flow grid step in log s");
  over("--rel-tol", &RunConfig::rel_tol, "relative quotient decrease for convergence");
  over("--grad-tol", &RunConfig::grad_tol, "relative gradient norm for convergence");
  over("--max-iterations", &RunConfig::max_iterations, "iteration cap");
  over("--max-degree", &RunConfig::max_degree, "harmonic degree for full minimisation");
  over("--theta", &RunConfig::theta, "flow implicitness, 1/2 to 1");
  over("--seed", &RunConfig::seed, "random seed");
  over("--out", &RunConfig::out, "snapshot file (minimize, flow)");
  over("--trace", &RunConfig::trace, "flow: CSV trace file; stdout then gets a JSON summary");

  ParamArgs pa;
  auto* derive_cmd = app.add_subcommand("derive", "derived parameters as JSON");
  pa.add(derive_cmd);

  int curve_d = 3, samples = 101;
  double a_min = -1.0, a_max = 0.0;
  auto* curve_cmd = app.add_subcommand("curve", "Felli-Schneider curve as CSV a,b_fs");
  curve_cmd->add_option("--d", curve_d, "dimension")->required();
  curve_cmd->add_option("--a-min", a_min, "first a")->required();
  curve_cmd->add_option("--a-max", a_max, "last a")->required();
  curve_cmd->add_option("--samples", samples, "number of samples");

  auto* radial_cmd = app.add_subcommand("radial-constant", "quotient of the radial optimizer");
  pa.add(radial_cmd);

  bool radial_only = false;
  std::string min_init = "soliton-y1";
  auto* min_cmd = app.add_subcommand("minimize", "minimise the cylinder quotient");
  pa.add(min_cmd);
  min_cmd->add_flag("--radial-only", radial_only, "restrict to z-only fields");
  min_cmd->add_option("--init", min_init, "soliton, soliton-y1 or gaussian");

  auto* breaking_cmd = app.add_subcommand("detect-breaking", "radial vs full minimisation");
  pa.add(breaking_cmd);

  int sd = 3, lmax = 1, ell = 1;
  double sp = 4.0, slambda = 0.0;
  bool eigenfunctions = false;
  auto* spec_cmd = app.add_subcommand("spectrum", "lowest eigenvalues of the mode operators");
  spec_cmd->add_option("--d", sd, "dimension")->required();
  spec_cmd->add_option("--p", sp, "exponent")->required();
  spec_cmd->add_option("--lmax", lmax, "highest mode");
  spec_cmd->add_option("--lambda", slambda, "Lambda (default: the threshold value)");
  spec_cmd->add_flag("--eigenfunctions", eigenfunctions, "include eigenfunction samples");

  auto* thr_cmd = app.add_subcommand("threshold", "Lambda where the lowest eigenvalue of mode ell vanishes");
  thr_cmd->add_option("--d", sd, "dimension")->required();
  thr_cmd->add_option("--p", sp, "exponent")->required();
  thr_cmd->add_option("--ell", ell, "mode");

  auto* sph_cmd = app.add_subcommand("sphere-threshold", "bifurcation from constants on S^d");
  sph_cmd->add_option("--d", sd, "dimension")->required();
  sph_cmd->add_option("--p", sp, "exponent")->required();

  double t_end = 1.0, dt = 0.01;
  std::string flow_init = "perturbed";
  auto* flow_cmd = app.add_subcommand("flow", "radial fast diffusion flow; J, mass trace as CSV");
  pa.add(flow_cmd);
  flow_cmd->add_option("--t-end", t_end, "final time")->required();
  flow_cmd->add_option("--dt", dt, "time step");
  flow_cmd->add_option("--init", flow_init, "perturbed, optimizer or self-similar");

  std::string suite;
  int seeds = 20;
  ParamArgs vpa;
  vpa.a = -0.5;
  vpa.b = -0.1;
  auto* verify_cmd = app.add_subcommand("verify", "identity checks on random fields");
  verify_cmd->add_option("--suite", suite, "lemma-first, lemma-second, bochner, sobolev-hessian or djdt")
      ->required()
      ->check(CLI::IsMember({"lemma-first", "lemma-second", "bochner", "sobolev-hessian", "djdt"}));
  verify_cmd->add_option("--seeds", seeds, "number of random fields");
  vpa.add(verify_cmd, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!config_path.empty()) read_config(ctx.cfg, config_path);
    for (auto& [opt, apply] : overrides)
      if (opt->count() > 0) apply(ctx.cfg);
    ctx.cfg.validate();

    if (*derive_cmd) cmd_derive(ctx, pa);
    else if (*curve_cmd) cmd_curve(curve_d, a_min, a_max, samples);
    else if (*radial_cmd) cmd_radial_constant(ctx, pa);
    else if (*min_cmd) cmd_minimize(ctx, pa, radial_only, min_init);
    else if (*breaking_cmd) cmd_detect_breaking(ctx, pa);
    else if (*spec_cmd) cmd_spectrum(ctx, sd, sp, lmax, slambda, eigenfunctions);
    else if (*thr_cmd) cmd_threshold(ctx, sd, sp, ell);
    else if (*sph_cmd) cmd_sphere_threshold(ctx, sd, sp);
    else if (*flow_cmd) cmd_flow(ctx, pa, t_end, dt, flow_init);
    else if (*verify_cmd) cmd_verify(ctx, suite, seeds, vpa);
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
