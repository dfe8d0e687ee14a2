#include <doctest.h>

#include "nehari/errors.hpp"
#include "support.hpp"

using namespace nehari;

namespace {

struct Fixture {
  ProblemSpec spec = testing::canonical();
  Problem pb = prepare_problem(spec, 512, 0);
  EnergyContext ctx = pb.context(100.0);
  SolveResult result = minimize(ctx, pb.params, seed_initial(ctx, spec));
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

}  // namespace

TEST_CASE("seed construction") {
  const Fixture& f = fixture();
  const Grid& g = *f.pb.grid;
  const WeightField& w = *f.pb.weight;
  const Field u0 = seed_initial(f.ctx, f.spec);

  int changes = 0;
  double last = 0.0;
  for (Index i : w.component_masks[0]) {
    if (u0[i] != 0.0) {
      if (last != 0.0 && (u0[i] > 0) != (last > 0)) ++changes;
      last = u0[i];
    }
  }
  CHECK(changes == 1);
  for (Index i : w.component_masks[1]) CHECK(u0[i] > 0.0);
  for (Index i : w.component_masks[2]) CHECK(u0[i] == 0.0);
  for (Index i : w.negative_mask) CHECK(u0[i] == 0.0);

  const Diagnostics d = diagnostics(f.ctx, u0);
  CHECK(d.norm_hat_minus == 0.0);
  CHECK(d.norm_remainder <= 1e-9 * d.norm_tilde_hat_plus);
  CHECK(d.mu_over_p_int == 0.0);

  for (double mu : {1.0, 100.0, 1e4}) CHECK(check_membership(f.pb.context(mu), f.pb.params, u0).all());

  SolveOptions twice;
  twice.seed_amplitude = 2.0;
  const Field u2 = seed_initial(f.ctx, f.spec, twice);
  CHECK((u2.values() - u0.values()).norm() <= 1e-12 * u0.values().norm());
  CHECK((f.pb.v_ref.values() - u0.values()).norm() <= 1e-12 * u0.values().norm());
  (void)g;
}

TEST_CASE("flow step") {
  auto g = std::make_shared<const Grid>(Box::interval(0, 1), 63);
  const EnergyContext none = testing::constant_weight(g, 0.0, 4.0);
  std::mt19937_64 rng(30);
  const Field u = testing::random_field(*g, rng);
  CHECK((flow_step(none, u, 0.3).values() - 0.7 * u.values()).norm() <= 1e-10 * u.values().norm());
  CHECK(flow_step(none, Field::zero(*g), 0.3).values().isZero(0.0));

  const Fixture& f = fixture();
  const Field start = seed_initial(f.ctx, f.spec) + testing::random_field(*f.pb.grid, rng, 0.1);
  const double e0 = energy(f.ctx, start);
  double dt = 1.0;
  int halvings = 0;
  while (!(energy(f.ctx, flow_step(f.ctx, start, dt)) < e0) && halvings < 80) {
    dt *= 0.5;
    ++halvings;
  }
  CHECK(halvings < 80);
  CHECK(energy(f.ctx, flow_step(f.ctx, start, dt)) < e0);
}

TEST_CASE("canonical solve") {
  const Fixture& f = fixture();
  const SolveResult& r = f.result;
  REQUIRE(r.converged());
  CHECK(r.iterations <= 50000);
  CHECK(r.pde_residual <= 1e-8);
  CHECK(r.pde_residual == pde_residual(f.ctx, r.u));
  CHECK(r.stationarity_constant > 0.0);
  CHECK(r.constraints.nontrivial);
  CHECK(r.constraints.nehari_ok);
  CHECK(r.constraints.energy_ok);
  CHECK(r.constraints.smallness_ok);
  CHECK(r.constraints.min_piece_norm >= f.pb.params.kappa);

  REQUIRE(r.energy_trace.size() >= 2);
  CHECK(r.scale_history.size() == r.energy_trace.size());
  for (std::size_t i = 1; i < r.energy_trace.size(); ++i)
    CHECK(r.energy_trace[i] <= r.energy_trace[i - 1] + 1e-12 * (1 + std::abs(r.energy_trace[i - 1])));
  CHECK(r.energy_trace.back() == doctest::Approx(energy(f.ctx, r.u)).epsilon(1e-15));
}

TEST_CASE("restart from a converged solution") {
  const Fixture& f = fixture();
  const SolveResult again = minimize(f.ctx, f.pb.params, f.result.u);
  CHECK(again.converged());
  CHECK(again.iterations <= 2);
  CHECK(norm(*f.pb.grid, again.u - f.result.u) <= 1e-9 * norm(*f.pb.grid, f.result.u));
}

TEST_CASE("iteration cap") {
  const Fixture& f = fixture();
  SolveOptions o;
  o.max_iters = 1;
  int calls = 0;
  o.on_iteration = [&](const IterationRecord&) { ++calls; };
  const SolveResult r = minimize(f.ctx, f.pb.params, seed_initial(f.ctx, f.spec), o);
  CHECK(r.status == SolveStatus::max_iterations);
  CHECK_FALSE(r.converged());
  CHECK(r.iterations == 1);
  CHECK(calls >= 1);
  CHECK(r.energy_trace.back() <= r.energy_trace.front());
}

TEST_CASE("diagnostics of a field inside the tilde and hat subspaces") {
  const Fixture& f = fixture();
  const NehariFrame fr = nehari_frame(f.ctx, f.result.u);
  const Field u = fr.parts.tilde + fr.parts.hat;
  const Diagnostics d = diagnostics(f.ctx, u);
  CHECK(d.norm_remainder <= 1e-9 * d.norm_tilde_hat_plus);
  CHECK(d.mu_over_p_int == 0.0);
  CHECK(d.negative_integral == 0.0);
}

TEST_CASE("sweep preconditions") {
  const Fixture& f = fixture();
  CHECK_THROWS_AS(mu_sweep(f.pb, {100.0}), DomainError);
  CHECK_THROWS_AS(mu_sweep(f.pb, {10.0, 100.0}), DomainError);
  CHECK_THROWS_AS(mu_sweep(f.pb, {10.0, 100.0, 50.0}), DomainError);
}

TEST_CASE("warm and cold starts agree at mu = 300") {
  const Fixture& f = fixture();
  SweepOptions warm, cold;
  cold.cold_start = true;
  const ContinuationReport w = mu_sweep(f.pb, {30.0, 100.0, 300.0}, {}, warm);
  const ContinuationReport c = mu_sweep(f.pb, {30.0, 100.0, 300.0}, {}, cold);
  REQUIRE(w.complete);
  REQUIRE(c.complete);
  CHECK(norm(*f.pb.grid, w.solutions.back() - c.solutions.back()) <= 1e-6);
  CHECK(w.kappa == f.pb.params.kappa);

  SweepOptions parallel = cold;
  parallel.jobs = 3;
  const ContinuationReport p = mu_sweep(f.pb, {30.0, 100.0, 300.0}, {}, parallel);
  REQUIRE(p.complete);
  for (std::size_t i = 0; i < 3; ++i) CHECK(p.solutions[i].values() == c.solutions[i].values());
}
