#pragma once

#include <Eigen/Dense>
#include <memory>
#include <random>

#include "nehari/solver.hpp"
#include "nehari/weight.hpp"

namespace testing {

using namespace nehari;

inline constexpr const char* canonical_text = R"(# three components, one per family
p = 4.0
mu = 100.0
domain = interval 0.0 1.0
negative_amp = 1.0
taper = 0.05
[component] family = tilde  region = 0.05 0.30  amp = 1.0
[component] family = hat    region = 0.40 0.60  amp = 1.0
[component] family = bar    region = 0.70 0.95  amp = 1.0
)";

inline ProblemSpec canonical() { return parse_spec(canonical_text); }

struct Setup {
  std::shared_ptr<const Grid> grid;
  std::shared_ptr<const WeightField> weight;
  EnergyContext ctx;
};

inline Setup make_setup(const ProblemSpec& spec, int n, double mu) {
  auto g = std::make_shared<const Grid>(spec.domain, n);
  auto w = std::make_shared<const WeightField>(build_weight(spec, *g));
  return Setup{g, w, EnergyContext(g, w, spec.p, mu)};
}

/// Context whose weight is a+ == value on every node and a- == 0.
inline EnergyContext constant_weight(std::shared_ptr<const Grid> g, double value, double p,
                                     double mu = 1.0) {
  auto w = std::make_shared<WeightField>();
  w->grid_id = g->id();
  w->a_plus = Vector::Constant(g->size(), value);
  w->a_minus = Vector::Zero(g->size());
  return EnergyContext(g, w, p, mu);
}

inline Field random_field(const Grid& g, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  Vector v(g.size());
  for (auto& x : v) x = d(rng);
  return Field(std::move(v), g.id());
}

inline Eigen::MatrixXd dense(const SparseMatrix& k) { return Eigen::MatrixXd(k); }

/// K-orthogonal projection onto fields vanishing off mask, by a dense solve.
inline Vector dense_projection(const Grid& g, const Field& u, const NodeMask& mask) {
  const Eigen::MatrixXd k = dense(g.stiffness());
  const Vector ku = k * u.values();
  const auto m = static_cast<Index>(mask.size());
  Eigen::MatrixXd kmm(m, m);
  Vector rhs(m);
  for (Index i = 0; i < m; ++i) {
    rhs[i] = ku[mask[i]];
    for (Index j = 0; j < m; ++j) kmm(i, j) = k(mask[i], mask[j]);
  }
  const Vector x = kmm.fullPivLu().solve(rhs);
  Vector out = Vector::Zero(g.size());
  for (Index i = 0; i < m; ++i) out[mask[i]] = x[i];
  return out;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testing
