// nehari: solve / sweep / check driver for the constrained-minimisation solver.
//
// Exit codes: 0 ok, 1 usage or spec error, 2 non-convergence, 3 check failure.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "cli_io.hpp"
#include "nehari/errors.hpp"
#include "nehari/logging.hpp"

#ifndef NEHARI_VERSION
#define NEHARI_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using namespace nehari;
using cli::ordered_json;

namespace {

enum Exit { ok = 0, usage = 1, not_converged = 2, check_failed = 3 };

struct Options {
  std::string spec_path;
  std::string solution_path;
  std::string out = ".";
  double mu = 0.0;
  double p = 0.0;
  int n = 0;
  std::uint64_t seed = 0;
  int max_iters = 50000;
  double tol = 0.0;
  std::string mu_list;
  std::string iter_log;
  bool cold = false;
  int jobs = 1;
  bool surface = false;
  bool degree = false;
};

struct Run {
  std::string command;
  std::string subcommand;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

ProblemSpec load(const Options& o) {
  ProblemSpec spec = load_spec(o.spec_path);
  if (o.p > 0.0) spec.p = o.p;
  if (o.mu > 0.0) spec.mu = o.mu;
  const ValidationReport vr = validate_spec(spec, true);
  for (const auto& w : vr.warnings) std::cerr << "warning: " << w << "\n";
  if (!vr.ok()) throw SpecError(vr.errors.front());
  return spec;
}

int default_n(const ProblemSpec& spec) { return spec.dim() == 1 ? 512 : 65; }

SolveOptions solve_options(const Options& o) {
  SolveOptions s;
  s.max_iters = o.max_iters;
  if (o.tol > 0.0) s.tol_grad = o.tol;
  return s;
}

void write_manifest(const Options& o, const Run& run, const ordered_json& extra = {}) {
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - run.start).count();
  char stamp[32];
  const std::time_t now = std::time(nullptr);
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  ordered_json m;
  m["tool"] = "nehari";
  m["version"] = NEHARI_VERSION;
  m["command"] = run.command;
  m["subcommand"] = run.subcommand;
  m["spec"] = o.spec_path;
  m["output_dir"] = o.out;
  m["seed"] = o.seed;
  ordered_json opt;
  opt["mu"] = o.mu;
  opt["p"] = o.p;
  opt["n"] = o.n;
  opt["max_iters"] = o.max_iters;
  opt["tol"] = o.tol;
  if (!o.mu_list.empty()) opt["mu_list"] = o.mu_list;
  if (!o.solution_path.empty()) opt["solution"] = o.solution_path;
  opt["cold"] = o.cold;
  opt["jobs"] = o.jobs;
  opt["surface"] = o.surface;
  opt["degree"] = o.degree;
  m["options"] = opt;
  for (auto it = extra.begin(); extra.is_object() && it != extra.end(); ++it) m[it.key()] = it.value();
  m["finished_utc"] = stamp;
  m["wall_clock_seconds"] = wall;
  cli::write_atomic((fs::path(o.out) / "manifest.json").string(), m.dump(2) + "\n");
}

std::string out_path(const Options& o, const char* name) { return (fs::path(o.out) / name).string(); }

void print_constraints(const ConstraintReport& r) {
  auto mark = [](bool b) { return b ? "pass" : "FAIL"; };
  std::printf("(i)   nontrivial pieces     %s  min norm %.6g\n", mark(r.nontrivial), r.min_piece_norm);
  std::printf("(ii)  nehari residuals      %s  bound %.3e\n", mark(r.nehari_ok), r.residual_bound);
  for (std::size_t k = 0; k < r.residuals.size(); ++k) std::printf("        r%zu = %.3e\n", k, r.residuals[k]);
  std::printf("(iii) energy cap            %s  %.12g <= %.12g\n", mark(r.energy_ok), r.energy, r.energy_cap);
  std::printf("(iv)  norm chain            %s  rem %.6g, min %.6g, main %.6g, R %.6g\n",
              mark(r.norm_chain_ok), r.norm_remainder, r.min_piece_norm, r.norm_tilde_hat_plus, r.R);
  std::printf("(v)   smallness             %s  hat- %.6g, bar %.6g, rho0 %.6g\n", mark(r.smallness_ok),
              r.norm_hat_minus, r.norm_bar_low, r.rho0);
  std::printf("all constraints: %s\n", r.all() ? "pass" : "FAIL");
}

int cmd_solve(Options& o, const Run& run) {
  const ProblemSpec spec = load(o);
  if (o.n <= 0) o.n = default_n(spec);
  o.mu = spec.mu;
  fs::create_directories(o.out);

  SolveOptions sopt = solve_options(o);
  std::string iter_log = "iteration,energy,gradient_norm,tangential_norm,step\n";
  if (!o.iter_log.empty()) {
    sopt.on_iteration = [&](const IterationRecord& r) {
      iter_log += std::to_string(r.iteration) + "," + cli::format_double(r.energy) + "," +
                  cli::format_double(r.gradient_norm) + "," + cli::format_double(r.tangential_norm) +
                  "," + cli::format_double(r.step) + "\n";
    };
  }

  const Problem pb = prepare_problem(spec, o.n, o.seed, sopt);
  const EnergyContext ctx = pb.context(spec.mu);
  const Field u0 = seed_initial(ctx, spec, sopt);
  const SolveResult r = minimize(ctx, pb.params, u0, sopt);

  ordered_json rep;
  rep["status"] = to_string(r.status);
  rep["message"] = r.message;
  rep["mu"] = spec.mu;
  rep["p"] = spec.p;
  rep["n"] = o.n;
  rep["iterations"] = r.iterations;
  rep["energy"] = energy(ctx, r.u);
  rep["pde_residual"] = r.pde_residual;
  rep["tangential_gradient"] = r.tangential_gradient;
  rep["stationarity_constant"] = r.stationarity_constant;
  rep["triple_history_length"] = r.scale_history.size();
  rep["params"] = cli::to_json(pb.params);
  rep["sobolev"] = {{"c", pb.sobolev.c}, {"best_ratio", pb.sobolev.best_ratio},
                    {"converged", pb.sobolev.converged}};
  rep["constraints"] = cli::to_json(r.constraints);
  rep["diagnostics"] = cli::to_json(diagnostics(ctx, r.u));

  cli::write_atomic(out_path(o, "solution.csv"), cli::solution_csv(ctx.grid(), ctx.weight(), r.u));
  cli::write_atomic(out_path(o, "report.json"), rep.dump(2) + "\n");
  if (!o.iter_log.empty()) cli::write_atomic(o.iter_log, iter_log);
  write_manifest(o, run, {{"status", to_string(r.status)}});

  std::printf("%s after %d iterations: energy %.12g, pde_residual %.3e, constraints %s\n",
              to_string(r.status).c_str(), r.iterations, energy(ctx, r.u), r.pde_residual,
              r.constraints.all() ? "pass" : "FAIL");
  if (!r.converged()) {
    std::cerr << "not converged: " << r.message << "\n";
    return not_converged;
  }
  return ok;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    out.push_back(v);
  }
  return out;
}

int cmd_sweep(Options& o, const Run& run) {
  std::vector<double> schedule;
  try {
    schedule = parse_list(o.mu_list);
  } catch (const std::exception&) {
    std::cerr << "error: --mu-list must be a comma separated list of numbers\n";
    return usage;
  }
  if (schedule.size() < 3) {
    std::cerr << "error: --mu-list needs at least 3 values\n";
    return usage;
  }
  const ProblemSpec spec = load(o);
  if (o.n <= 0) o.n = default_n(spec);
  fs::create_directories(o.out);

  const SolveOptions sopt = solve_options(o);
  SweepOptions sw;
  sw.cold_start = o.cold;
  sw.jobs = o.jobs;
  const Problem pb = prepare_problem(spec, o.n, o.seed, sopt);
  const ContinuationReport rep = mu_sweep(pb, schedule, sopt, sw);

  std::string csv = "mu,energy,norm_hat_minus,norm_bar_low,norm_remainder,mu_over_p_int,min_three_norms,kappa\n";
  for (const SweepEntry& e : rep.entries) {
    csv += cli::format_double(e.mu) + "," + cli::format_double(e.diag.energy) + "," +
           cli::format_double(e.diag.norm_hat_minus) + "," + cli::format_double(e.diag.norm_bar_low) +
           "," + cli::format_double(e.diag.norm_remainder) + "," +
           cli::format_double(e.diag.mu_over_p_int) + "," + cli::format_double(e.diag.min_piece_norm) +
           "," + cli::format_double(rep.kappa) + "\n";
  }
  ordered_json v;
  v["complete"] = rep.complete;
  v["message"] = rep.message;
  v["kappa"] = rep.kappa;
  v["verdicts"] = cli::to_json(rep.verdicts);
  ordered_json per = ordered_json::array();
  for (const SweepEntry& e : rep.entries)
    per.push_back({{"mu", e.mu}, {"status", to_string(e.status)}, {"iterations", e.iterations},
                   {"pde_residual", e.pde_residual}, {"constraints_ok", e.constraints_ok}});
  v["solves"] = per;

  cli::write_atomic(out_path(o, "sweep.csv"), csv);
  cli::write_atomic(out_path(o, "verdicts.json"), v.dump(2) + "\n");
  write_manifest(o, run);

  for (const SweepEntry& e : rep.entries)
    std::printf("mu %-10g %s  energy %.10g  rem %.4g  penalty %.4g  min %.4g\n", e.mu,
                to_string(e.status).c_str(), e.diag.energy, e.diag.norm_remainder,
                e.diag.mu_over_p_int, e.diag.min_piece_norm);
  if (!rep.complete) {
    std::cerr << "sweep aborted: " << rep.message << "\n";
    return not_converged;
  }
  const SweepVerdicts& vd = rep.verdicts;
  std::printf("penalty monotone %d, floors %d, kappa bound %d, norms monotone %d, penalty ratio %.4g\n",
              vd.penalty_monotone, vd.floors_reached, vd.kappa_bound, vd.norms_monotone, vd.penalty_ratio);
  return vd.all() ? ok : check_failed;
}

int cmd_check(Options& o, const Run& run) {
  const ProblemSpec spec = load(o);
  const int stored = cli::stored_nodes_per_axis(o.solution_path);
  if (o.n > 0 && o.n != stored)
    throw GridMismatch("solution has " + std::to_string(stored) + " nodes per axis, --n is " +
                       std::to_string(o.n));
  o.n = stored;
  o.mu = spec.mu;

  const Problem pb = prepare_problem(spec, o.n, o.seed, solve_options(o));
  const EnergyContext ctx = pb.context(spec.mu);
  const Field u = cli::read_solution_csv(o.solution_path, ctx.grid());
  const ConstraintReport cr = check_membership(ctx, pb.params, u, {1e-6, solve_options(o).nehari_tol});
  fs::create_directories(o.out);

  ordered_json j;
  j["mu"] = spec.mu;
  j["p"] = spec.p;
  j["n"] = o.n;
  j["energy"] = energy(ctx, u);
  j["pde_residual"] = pde_residual(ctx, u);
  j["params"] = cli::to_json(pb.params);
  j["constraints"] = cli::to_json(cr);
  j["diagnostics"] = cli::to_json(diagnostics(ctx, u));
  print_constraints(cr);
  bool pass = cr.all();

  if (o.surface) {
    const SurfaceReport s = f_surface(ctx, u, 21);
    std::string csv = "r,s,t,f\n";
    for (std::size_t i = 0; i < s.points.size(); ++i)
      csv += cli::format_double(s.points[i][0]) + "," + cli::format_double(s.points[i][1]) + "," +
             cli::format_double(s.points[i][2]) + "," + cli::format_double(s.values[i]) + "\n";
    cli::write_atomic(out_path(o, "fsurface.csv"), csv);
    const double sep = separation(s, 0.5);
    const bool at_center = s.argmax == s.center;
    std::printf("f-surface: argmax at (1,1,1) %s, f(1,1,1) - I(u) = %.3e, separation(0.5) = %.6g\n",
                at_center ? "yes" : "NO", s.f_center - energy(ctx, u), sep);
    j["surface"] = {{"points", s.points.size()}, {"argmax_is_center", at_center},
                    {"f_center", s.f_center}, {"separation", sep}};
    pass = pass && at_center && sep > 0.0;
  }
  if (o.degree) {
    const DegreeReport d = degree_check(ctx, u);
    std::printf("degree: winding %s, boundary distance %.6g, homogeneity error %.3e, certificate %s\n",
                d.winding ? "yes" : "no", d.boundary_distance, d.homogeneity_error,
                d.certificate() ? "true" : "false");
    j["degree"] = {{"winding", d.winding}, {"boundary_distance", d.boundary_distance},
                   {"phi_psi_gap", d.phi_psi_gap}, {"homogeneity_error", d.homogeneity_error},
                   {"certificate", d.certificate()}};
    pass = pass && d.certificate();
  }
  cli::write_atomic(out_path(o, "check.json"), j.dump(2) + "\n");
  write_manifest(o, run);
  return pass ? ok : check_failed;
}

}  // namespace

int main(int argc, char** argv) {
  logging::configure_from_env();
  Options o;
  Run run;
  for (int i = 0; i < argc; ++i) run.command += (i ? " " : "") + std::string(argv[i]);

  CLI::App app{"Multibump nodal solutions by minimisation on a Nehari-type set"};
  app.set_version_flag("--version", NEHARI_VERSION);
  app.require_subcommand(1);

  auto common = [&](CLI::App* c) {
    c->add_option("spec", o.spec_path, "problem spec file")->required()->check(CLI::ExistingFile);
    c->add_option("--mu", o.mu, "penalty parameter (overrides the spec)")->check(CLI::PositiveNumber);
    c->add_option("--p", o.p, "exponent (overrides the spec)");
    c->add_option("--n", o.n, "interior nodes per axis (512 in 1D, 65 in 2D)")->check(CLI::PositiveNumber);
    c->add_option("--out", o.out, "output directory");
    c->add_option("--seed", o.seed, "seed of the Sobolev estimator");
    c->add_option("--max-iters", o.max_iters, "iteration cap")->check(CLI::PositiveNumber);
    c->add_option("--tol", o.tol, "tangential gradient tolerance")->check(CLI::PositiveNumber);
  };

  CLI::App* solve = app.add_subcommand("solve", "minimise at one mu");
  common(solve);
  solve->add_option("--iter-log", o.iter_log, "write per-iteration CSV to this file");

  CLI::App* sweep = app.add_subcommand("sweep", "continuation in mu");
  common(sweep);
  sweep->add_option("--mu-list", o.mu_list, "increasing comma separated mu values")->required();
  sweep->add_flag("--cold", o.cold, "start every solve from the seed");
  sweep->add_option("--jobs", o.jobs, "parallel cold-start solves")->check(CLI::PositiveNumber);

  CLI::App* check = app.add_subcommand("check", "check a stored solution");
  common(check);
  check->add_option("solution", o.solution_path, "solution.csv")->required()->check(CLI::ExistingFile);
  check->add_flag("--surface", o.surface, "write fsurface.csv on a 21^3 grid");
  check->add_flag("--degree", o.degree, "print the degree certificate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? ok : usage;
  }

  try {
    run.subcommand = *solve ? "solve" : *sweep ? "sweep" : "check";
    if (*solve) return cmd_solve(o, run);
    if (*sweep) return cmd_sweep(o, run);
    return cmd_check(o, run);
  } catch (const SpecError& e) {
    std::cerr << "spec error: " << e.what() << "\n";
    return usage;
  } catch (const GridMismatch& e) {
    std::cerr << "grid mismatch: " << e.what() << "\n";
    return usage;
  } catch (const SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return not_converged;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return usage;
  }
}
