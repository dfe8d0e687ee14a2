#include "nehari/solver.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "nehari/errors.hpp"
#include "nehari/logging.hpp"

namespace nehari {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iterations: return "max_iterations";
    case SolveStatus::stalled: return "stalled";
    case SolveStatus::sign_pattern_lost: return "sign_pattern_lost";
  }
  return "?";
}

namespace {

double bump(const Box& box, const std::array<double, 2>& x) {
  if (!box.strictly_inside(x.data())) return 0.0;
  double v = 1.0;
  for (int a = 0; a < box.dim; ++a) {
    const Interval& I = box.axes[a];
    v *= 4.0 * (x[a] - I.lo) * (I.hi - x[a]) / (I.length() * I.length());
  }
  return v;
}

// Scales w onto its Nehari ray: lambda^{p-2} = ||w||^2 / sum q a+ |w|^p.
Field scale_to_ray(const EnergyContext& ctx, Field w) {
  const double n2 = inner_product(ctx.grid(), w, w);
  const double nl = weighted_p_integral(ctx.grid(), ctx.weight().a_plus, w, ctx.p());
  if (!(n2 > 0.0) || !(nl > 0.0)) throw SpecError("seed bump has no interior nodes (component too thin)");
  return std::pow(n2 / nl, 1.0 / (ctx.p() - 2.0)) * std::move(w);
}

}  // namespace

Field seed_initial(const EnergyContext& ctx, const ProblemSpec& spec, const SolveOptions& opts) {
  const Grid& g = ctx.grid();
  const WeightField& wf = ctx.weight();
  if (wf.component_masks.size() != spec.components.size())
    throw GridMismatch("weight was built from another spec");
  if (spec.family_indices(Family::tilde).empty() || spec.family_indices(Family::hat).empty())
    throw SpecError("seed needs at least one tilde and one hat component");

  Field u = Field::zero(g);
  for (std::size_t c = 0; c < spec.components.size(); ++c) {
    const Component& comp = spec.components[c];
    const NodeMask& mask = wf.component_masks[c];
    if (comp.family == Family::bar) continue;
    if (comp.family == Family::hat) {
      Field w = Field::zero(g);
      for (Index i : mask) w[i] = opts.seed_amplitude * bump(comp.region, g.node(i));
      u += scale_to_ray(ctx, std::move(w));
      continue;
    }
    // Split along the longest axis at the node nearest to the midpoint.
    int axis = 0;
    if (comp.region.dim == 2 && comp.region.axes[1].length() > comp.region.axes[0].length()) axis = 1;
    const Interval& I = comp.region.axes[axis];
    const double mid = 0.5 * (I.lo + I.hi);
    double split = g.node(mask.front())[axis];
    for (Index i : mask) {
      const double x = g.node(i)[axis];
      if (std::abs(x - mid) < std::abs(split - mid)) split = x;
    }
    Box left = comp.region, right = comp.region;
    left.axes[axis].hi = split;
    right.axes[axis].lo = split;
    Field wl = Field::zero(g), wr = Field::zero(g);
    for (Index i : mask) {
      const auto x = g.node(i);
      wl[i] = opts.seed_amplitude * bump(left, x);
      wr[i] = opts.seed_amplitude * bump(right, x);
    }
    u += scale_to_ray(ctx, std::move(wl));
    u -= scale_to_ray(ctx, std::move(wr));
  }
  return u;
}

Field flow_step(const EnergyContext& ctx, const Field& u, double dt) {
  if (!(dt > 0.0)) throw DomainError("flow step needs dt > 0");
  return u - dt * riesz_gradient(ctx, u);
}

double tangential_gradient_norm(const EnergyContext& ctx, const Field& u, const Field& gradient) {
  const Grid& g = ctx.grid();
  const NehariFrame frame = nehari_frame(ctx, u);
  const Index k = static_cast<Index>(frame.size());
  Eigen::MatrixXd G(k, k);
  Vector rhs(k);
  std::vector<Vector> Kp(k);
  for (Index i = 0; i < k; ++i) Kp[i] = g.stiffness() * frame.pieces[i].values();
  for (Index i = 0; i < k; ++i) {
    for (Index j = 0; j < k; ++j) G(i, j) = frame.pieces[j].values().dot(Kp[i]);
    rhs[i] = gradient.values().dot(Kp[i]);
  }
  const double total = inner_product(g, gradient, gradient);
  if (k == 0) return std::sqrt(total);
  const Vector coef = G.ldlt().solve(rhs);
  return std::sqrt(std::max(0.0, total - coef.dot(rhs)));
}

SolveResult minimize(const EnergyContext& ctx, const NehariParams& params, const Field& u0,
                     const SolveOptions& opts) {
  const Grid& g = ctx.grid();
  SolveResult res;
  Rescaled start;
  try {
    start = rescale_to_nehari(ctx, u0);
  } catch (const SignPatternLost& e) {
    res.u = u0;
    res.status = SolveStatus::sign_pattern_lost;
    res.message = e.what();
    res.constraints = check_membership(ctx, params, u0, {1e-6, opts.nehari_tol});
    res.pde_residual = pde_residual(ctx, u0);
    return res;
  }

  Field u = std::move(start.w);
  double E = energy(ctx, u);
  Field grad = riesz_gradient(ctx, u);
  double gnorm = norm(g, grad);
  double dt = opts.dt0;
  res.energy_trace.push_back(E);
  res.scale_history.push_back(start.scales);

  double tangential = 0.0;
  int it = 0;
  for (;; ++it) {
    tangential = tangential_gradient_norm(ctx, u, grad);
    const NehariFrame frame = nehari_frame(ctx, u);
    const double resid = nehari_residuals(ctx, u, frame).cwiseAbs().maxCoeff();
    const double bound = opts.nehari_tol * (1.0 + norm(g, u));
    if (opts.on_iteration)
      opts.on_iteration({it, E, gnorm, tangential, dt, res.scale_history.back()});
    if (tangential <= opts.tol_grad && resid <= bound) {
      res.status = SolveStatus::converged;
      break;
    }
    if (it >= opts.max_iters) {
      res.status = SolveStatus::max_iterations;
      res.message = "iteration cap exceeded";
      break;
    }

    bool accepted = false;
    while (!accepted) {
      if (dt < opts.min_dt) break;
      Rescaled trial;
      try {
        trial = rescale_to_nehari(ctx, u - dt * grad);
      } catch (const SignPatternLost&) {
        dt *= opts.shrink;
        continue;
      }
      const double Et = energy(ctx, trial.w);
      const double slack = 1e-12 * (1.0 + std::abs(E));
      if (Et <= E + slack) {
        Field gt = riesz_gradient(ctx, trial.w);
        const double gtn = norm(g, gt);
        // Below the energy resolution the gradient norm has to drop instead.
        if (Et < E - slack || gtn <= gnorm) {
          u = std::move(trial.w);
          E = Et;
          grad = std::move(gt);
          gnorm = gtn;
          res.energy_trace.push_back(E);
          res.scale_history.push_back(trial.scales);
          accepted = true;
          dt *= opts.grow;
          break;
        }
      }
      dt *= opts.shrink;
    }
    if (!accepted) {
      res.status = SolveStatus::stalled;
      res.message = "step size underflow";
      break;
    }
    if (it % 1000 == 0)
      logging::trace("iter {} energy {:.15g} |grad| {:.3e} dt {:.3e}", it, E, gnorm, dt);
  }

  res.u = std::move(u);
  res.iterations = it;
  res.tangential_gradient = tangential;
  res.pde_residual = gnorm;
  res.constraints = check_membership(ctx, params, res.u, {1e-6, opts.nehari_tol});
  const double denom = opts.tol_grad + res.constraints.residual_bound;
  res.stationarity_constant = res.pde_residual / denom;
  logging::info("minimize mu={} status={} iterations={} energy={:.12g} residual={:.3e}", ctx.mu(),
            to_string(res.status), res.iterations, E, res.pde_residual);
  return res;
}

Diagnostics diagnostics(const EnergyContext& ctx, const Field& u) {
  const Grid& g = ctx.grid();
  const NehariFrame frame = nehari_frame(ctx, u);
  Diagnostics d;
  d.energy = energy(ctx, u);
  d.norm_hat_minus = norm(g, frame.hat_minus);
  d.norm_bar_low = norm(g, frame.parts.bar_low);
  d.norm_remainder = norm(g, frame.parts.remainder);
  d.mu_over_p_int =
      ctx.mu() / ctx.p() * weighted_p_integral(g, ctx.weight().a_minus, frame.parts.remainder, ctx.p());
  d.norm_tilde_hat_plus = norm(g, frame.parts.tilde + positive_part(frame.parts.hat));
  d.min_piece_norm = std::numeric_limits<double>::infinity();
  for (const Field& piece : frame.pieces) d.min_piece_norm = std::min(d.min_piece_norm, norm(g, piece));
  if (frame.size() == 0) d.min_piece_norm = 0.0;
  const Vector& q = g.quadrature();
  for (Index i : ctx.weight().negative_mask)
    d.negative_integral += q[i] * ctx.weight().a_minus[i] * abs_pow(u[i], ctx.p());
  return d;
}

EnergyContext Problem::context(double mu) const { return EnergyContext(grid, weight, decomposer, spec.p, mu); }

Problem prepare_problem(const ProblemSpec& spec, int n, std::uint64_t seed, const SolveOptions& opts) {
  const ValidationReport vr = validate_spec(spec, true);
  if (!vr.ok()) throw SpecError(vr.errors.front());
  Problem pb;
  pb.spec = spec;
  pb.n = n;
  pb.grid = std::make_shared<const Grid>(spec.domain, n);
  pb.weight = std::make_shared<const WeightField>(build_weight(spec, *pb.grid));
  pb.decomposer = std::make_shared<const Decomposer>(pb.grid, *pb.weight);
  pb.sobolev = estimate_sobolev_constant(*pb.grid, spec.p, seed);
  const EnergyContext ctx = pb.context(spec.mu);
  pb.v_ref = seed_initial(ctx, spec, opts);
  pb.params = make_params(ctx, pb.v_ref, pb.sobolev.c);
  return pb;
}

namespace {

bool non_increasing(const std::vector<double>& v, double slack, double noise) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > (1.0 + slack) * v[i - 1] + noise) return false;
  return true;
}

}  // namespace

ContinuationReport mu_sweep(const Problem& problem, const std::vector<double>& schedule,
                            const SolveOptions& opts, const SweepOptions& sweep) {
  if (schedule.size() < 3) throw DomainError("mu schedule needs at least 3 values");
  for (std::size_t i = 1; i < schedule.size(); ++i)
    if (!(schedule[i] > schedule[i - 1])) throw DomainError("mu schedule must be strictly increasing");
  if (!(schedule.front() > 0.0)) throw DomainError("mu must be positive");

  ContinuationReport rep;
  rep.kappa = problem.params.kappa;

  auto record = [&](double mu, const EnergyContext& ctx, SolveResult&& r) {
    SweepEntry e;
    e.mu = mu;
    e.diag = diagnostics(ctx, r.u);
    e.status = r.status;
    e.iterations = r.iterations;
    e.pde_residual = r.pde_residual;
    e.constraints_ok = r.constraints.all();
    rep.entries.push_back(e);
    rep.solutions.push_back(std::move(r.u));
    return r.status == SolveStatus::converged;
  };

  if (sweep.cold_start) {
    std::vector<SolveResult> results(schedule.size());
    auto solve_one = [&](std::size_t i) {
      const EnergyContext ctx = problem.context(schedule[i]);
      return minimize(ctx, problem.params, problem.v_ref, opts);
    };
    const std::size_t jobs = static_cast<std::size_t>(std::max(1, sweep.jobs));
    for (std::size_t base = 0; base < schedule.size(); base += jobs) {
      std::vector<std::future<SolveResult>> fut;
      for (std::size_t i = base; i < std::min(schedule.size(), base + jobs); ++i)
        fut.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred, solve_one, i));
      for (std::size_t i = 0; i < fut.size(); ++i) results[base + i] = fut[i].get();
    }
    for (std::size_t i = 0; i < schedule.size(); ++i) {
      if (!record(schedule[i], problem.context(schedule[i]), std::move(results[i]))) {
        rep.message = "solve at mu=" + std::to_string(schedule[i]) + " did not converge";
        return rep;
      }
    }
  } else {
    Field start = problem.v_ref;
    for (double mu : schedule) {
      const EnergyContext ctx = problem.context(mu);
      SolveResult r = minimize(ctx, problem.params, start, opts);
      start = r.u;
      if (!record(mu, ctx, std::move(r))) {
        rep.message = "solve at mu=" + std::to_string(mu) + " did not converge";
        return rep;
      }
    }
  }
  rep.complete = true;

  std::vector<double> pen, hm, bl, rm;
  double scale = 0.0, escale = 0.0;
  bool kappa_ok = true;
  for (const SweepEntry& e : rep.entries) {
    pen.push_back(e.diag.mu_over_p_int);
    hm.push_back(e.diag.norm_hat_minus);
    bl.push_back(e.diag.norm_bar_low);
    rm.push_back(e.diag.norm_remainder);
    scale = std::max(scale, e.diag.norm_tilde_hat_plus);
    escale = std::max(escale, std::abs(e.diag.energy));
    kappa_ok = kappa_ok && e.diag.min_piece_norm >= rep.kappa;
  }
  // Values at rounding level are not compared.
  const double norm_noise = 1e-10 * (1.0 + scale);
  const double energy_noise = 1e-12 * (1.0 + escale);
  const double rho0 = problem.params.rho0;
  auto floor_or = [&](double f) { return f > 0.0 ? f : rho0; };

  SweepVerdicts& v = rep.verdicts;
  v.penalty_monotone = non_increasing(pen, sweep.slack, energy_noise);
  v.norms_monotone = non_increasing(hm, sweep.slack, norm_noise) &&
                     non_increasing(bl, sweep.slack, norm_noise) &&
                     non_increasing(rm, sweep.slack, norm_noise);
  v.floors_reached = hm.back() <= floor_or(sweep.floor_hat_minus) &&
                     bl.back() <= floor_or(sweep.floor_bar_low) &&
                     rm.back() <= floor_or(sweep.floor_remainder);
  v.kappa_bound = kappa_ok;
  v.penalty_ratio = pen.front() > 0.0 ? pen.back() / pen.front() : 0.0;
  return rep;
}

}  // namespace nehari
