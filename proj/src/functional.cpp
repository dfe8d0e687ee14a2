#include "nehari/functional.hpp"

#include "nehari/errors.hpp"

namespace nehari {

EnergyContext::EnergyContext(std::shared_ptr<const Grid> grid,
                             std::shared_ptr<const WeightField> weight, double p, double mu)
    : EnergyContext(grid, weight, std::make_shared<const Decomposer>(grid, *weight), p, mu) {}

EnergyContext::EnergyContext(std::shared_ptr<const Grid> grid,
                             std::shared_ptr<const WeightField> weight,
                             std::shared_ptr<const Decomposer> decomposer, double p, double mu)
    : grid_(std::move(grid)),
      weight_(std::move(weight)),
      decomposer_(std::move(decomposer)),
      p_(p),
      mu_(mu) {
  if (!(p_ > 2.0)) throw DomainError("p must exceed 2");
  if (!(mu_ > 0.0)) throw DomainError("mu must be positive");
  if (weight_->grid_id != grid_->id()) throw GridMismatch("weight does not live on this grid");
  a_mu_ = weight_->combined(mu_);
}

EnergyContext EnergyContext::with_mu(double mu) const {
  return EnergyContext(grid_, weight_, decomposer_, p_, mu);
}

double energy(const EnergyContext& ctx, const Field& u) {
  const Grid& g = ctx.grid();
  return 0.5 * inner_product(g, u, u) - weighted_p_integral(g, ctx.a_mu(), u, ctx.p()) / ctx.p();
}

Vector nonlinear_load(const EnergyContext& ctx, const Field& u) {
  require_on_grid(ctx.grid(), u);
  const Vector& q = ctx.grid().quadrature();
  const Vector& a = ctx.a_mu();
  const double e = ctx.p() - 2.0;
  Vector out(u.size());
  for (Index i = 0; i < u.size(); ++i) out[i] = q[i] * a[i] * abs_pow(u[i], e) * u[i];
  return out;
}

double dir_derivative(const EnergyContext& ctx, const Field& u, const Field& w) {
  require_same_grid(u, w);
  return inner_product(ctx.grid(), u, w) - nonlinear_load(ctx, u).dot(w.values());
}

Field nodal_residual(const EnergyContext& ctx, const Field& u) {
  require_on_grid(ctx.grid(), u);
  return Field(ctx.grid().stiffness() * u.values() - nonlinear_load(ctx, u), u.grid_id());
}

Field riesz_gradient(const EnergyContext& ctx, const Field& u) {
  return ctx.decomposer().full_solver().solve(nodal_residual(ctx, u));
}

double pde_residual(const EnergyContext& ctx, const Field& u) {
  return norm(ctx.grid(), riesz_gradient(ctx, u));
}

}  // namespace nehari
