#pragma once

#include <cmath>
#include <memory>

#include "nehari/decomposition.hpp"
#include "nehari/grid.hpp"
#include "nehari/weight.hpp"

namespace nehari {

/// |x|^e, with exact multiplication for the common integer exponents.
inline double abs_pow(double x, double e) {
  const double a = std::abs(x);
  if (e == 2.0) return a * a;
  if (e == 4.0) {
    const double s = a * a;
    return s * s;
  }
  if (e == 3.0) return a * a * a;
  if (e == 1.0) return a;
  if (a == 0.0) return 0.0;
  return std::pow(a, e);
}

/// Everything needed to evaluate I_mu(u) = 1/2 ||u||^2 - 1/p sum q (a+ - mu a-) |u|^p
/// on one grid. Copies share the grid, the weight and the prefactored solvers.
class EnergyContext {
 public:
  EnergyContext(std::shared_ptr<const Grid> grid, std::shared_ptr<const WeightField> weight,
                double p, double mu);
  EnergyContext(std::shared_ptr<const Grid> grid, std::shared_ptr<const WeightField> weight,
                std::shared_ptr<const Decomposer> decomposer, double p, double mu);

  /// Same grid, weight and solvers at another parameter value.
  EnergyContext with_mu(double mu) const;

  const Grid& grid() const { return *grid_; }
  const WeightField& weight() const { return *weight_; }
  const Decomposer& decomposer() const { return *decomposer_; }
  std::shared_ptr<const Grid> grid_ptr() const { return grid_; }
  double p() const { return p_; }
  double mu() const { return mu_; }
  /// Nodal a+ - mu a-.
  const Vector& a_mu() const { return a_mu_; }

 private:
  std::shared_ptr<const Grid> grid_;
  std::shared_ptr<const WeightField> weight_;
  std::shared_ptr<const Decomposer> decomposer_;
  double p_;
  double mu_;
  Vector a_mu_;
};

double energy(const EnergyContext& ctx, const Field& u);

/// Nodal vector q (a+ - mu a-) |u|^{p-2} u.
Vector nonlinear_load(const EnergyContext& ctx, const Field& u);

/// I_mu'(u)(w) = <u, w> - sum q (a+ - mu a-) |u|^{p-2} u w.
double dir_derivative(const EnergyContext& ctx, const Field& u, const Field& w);

/// K u - q (a+ - mu a-) |u|^{p-2} u.
Field nodal_residual(const EnergyContext& ctx, const Field& u);

/// H^1_0 gradient: the field g with <g, w> = I_mu'(u)(w) for all w.
Field riesz_gradient(const EnergyContext& ctx, const Field& u);

/// ||riesz_gradient(u)||, the discrete H^{-1} residual of the PDE.
double pde_residual(const EnergyContext& ctx, const Field& u);

}  // namespace nehari
