#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "nehari/functional.hpp"
#include "nehari/nehari.hpp"
#include "nehari/problem_spec.hpp"

namespace nehari {

struct IterationRecord {
  int iteration = 0;
  double energy = 0.0;
  double gradient_norm = 0.0;
  double tangential_norm = 0.0;
  double step = 0.0;
  Vector scales;
};

struct SolveOptions {
  double dt0 = 0.1;
  double shrink = 0.5;
  double grow = 1.25;
  double min_dt = 1e-14;
  int max_iters = 50000;
  double tol_grad = 5e-9;         // on the Nehari-tangential gradient norm
  double nehari_tol = 1e-8;       // relative, as in MembershipTolerances
  double seed_amplitude = 1.0;
  std::function<void(const IterationRecord&)> on_iteration;
};

enum class SolveStatus { converged, max_iterations, stalled, sign_pattern_lost };
std::string to_string(SolveStatus s);

struct SolveResult {
  Field u;
  SolveStatus status = SolveStatus::max_iterations;
  std::string message;
  int iterations = 0;
  std::vector<double> energy_trace;      // after every accepted step (index 0: rescaled start)
  std::vector<Vector> scale_history;     // rescaling factors, aligned with energy_trace
  double pde_residual = 0.0;
  double tangential_gradient = 0.0;
  double stationarity_constant = 0.0;    // pde_residual / (tol_grad + Nehari residual bound)
  ConstraintReport constraints;

  bool converged() const { return status == SolveStatus::converged; }
};

/// Quantities tracked along minimisation and parameter sweeps.
struct Diagnostics {
  double energy = 0.0;
  double norm_hat_minus = 0.0;
  double norm_bar_low = 0.0;
  double norm_remainder = 0.0;
  double mu_over_p_int = 0.0;       // (mu/p) sum q a- |rem|^p
  double norm_tilde_hat_plus = 0.0;
  double min_piece_norm = 0.0;
  double negative_integral = 0.0;   // sum over the negative set of q a- |u|^p
};

/// Sign-changing bump pair on every tilde component (split at the node
/// closest to the midpoint of its longest axis) plus a positive bump on every
/// hat component, each signed piece scaled onto its own Nehari ray.
Field seed_initial(const EnergyContext& ctx, const ProblemSpec& spec, const SolveOptions& opts = {});

/// Explicit Euler step u - dt * riesz_gradient(u).
Field flow_step(const EnergyContext& ctx, const Field& u, double dt);

/// Norm of the Riesz gradient with its K-orthogonal projection onto the
/// span of the Nehari pieces removed.
double tangential_gradient_norm(const EnergyContext& ctx, const Field& u, const Field& gradient);

/// Descent on the Nehari set: backtracking gradient-flow steps, each followed
/// by rescale_to_nehari.
SolveResult minimize(const EnergyContext& ctx, const NehariParams& params, const Field& u0,
                     const SolveOptions& opts = {});

Diagnostics diagnostics(const EnergyContext& ctx, const Field& u);

/// A spec discretised on a grid together with everything derived from it
/// once: the weight, the solvers, the Sobolev estimate, v_ref and the
/// constraint-set parameters.
struct Problem {
  ProblemSpec spec;
  int n = 0;
  std::shared_ptr<const Grid> grid;
  std::shared_ptr<const WeightField> weight;
  std::shared_ptr<const Decomposer> decomposer;
  SobolevEstimate sobolev;
  Field v_ref;
  NehariParams params;

  EnergyContext context(double mu) const;
};

Problem prepare_problem(const ProblemSpec& spec, int n, std::uint64_t seed = 0,
                        const SolveOptions& opts = {});

struct SweepOptions {
  double slack = 0.1;
  // Floors for ||u^-||, ||u_bar||, ||rem|| at the largest mu; <= 0 means rho0.
  double floor_hat_minus = 0.0;
  double floor_bar_low = 0.0;
  double floor_remainder = 0.0;
  bool cold_start = false;
  int jobs = 1;
};

struct SweepEntry {
  double mu = 0.0;
  Diagnostics diag;
  SolveStatus status = SolveStatus::max_iterations;
  int iterations = 0;
  double pde_residual = 0.0;
  bool constraints_ok = false;
};

struct SweepVerdicts {
  bool penalty_monotone = false;   // (mu/p) int a- |rem|^p non-increasing within slack
  bool floors_reached = false;     // small parts below their floors at the largest mu
  bool kappa_bound = false;        // min piece norm >= kappa at every mu
  bool norms_monotone = false;     // ||u^-||, ||u_bar||, ||rem|| non-increasing within slack
  double penalty_ratio = 0.0;      // last / first penalty value

  bool all() const { return penalty_monotone && floors_reached && kappa_bound && norms_monotone; }
};

struct ContinuationReport {
  std::vector<SweepEntry> entries;
  std::vector<Field> solutions;
  SweepVerdicts verdicts;
  double kappa = 0.0;
  bool complete = false;
  std::string message;
};

/// Solves along an increasing mu schedule (length >= 3), warm-starting each
/// solve from the previous solution unless cold_start is set.
ContinuationReport mu_sweep(const Problem& problem, const std::vector<double>& schedule,
                            const SolveOptions& opts = {}, const SweepOptions& sweep = {});

}  // namespace nehari
