#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "nehari/grid.hpp"
#include "nehari/weight.hpp"

namespace nehari {

/// u = tilde + hat + bar_low + remainder, with tilde, hat and bar_low the
/// K-orthogonal projections onto the fields supported in the respective
/// family's components and remainder discrete-harmonic inside every component.
struct Decomposition {
  Field tilde;
  Field hat;
  Field bar_low;
  Field remainder;
  std::vector<Field> components;  // per-component projections, aligned with the weight's masks
};

/// K-orthogonal projection of u onto the fields vanishing off mask, computed
/// with solve_spd (conjugate gradients).
Field project_component(const Grid& g, const Field& u, const NodeMask& mask);

/// Nodewise positive and negative parts, u = plus - minus.
std::pair<Field, Field> split_signs(const Field& u);
Field positive_part(const Field& u);
Field negative_part(const Field& u);

/// Decomposition through project_component.
Decomposition decompose(const Grid& g, const WeightField& w, const Field& u);

/// Same decomposition with prefactored per-component solvers; also owns the
/// full-grid solver used for Riesz gradients.
class Decomposer {
 public:
  Decomposer(std::shared_ptr<const Grid> grid, const WeightField& weight);

  Decomposition decompose(const Field& u) const;

  const Grid& grid() const { return *grid_; }
  const SpdSolver& full_solver() const { return full_; }
  const SpdSolver& component_solver(std::size_t c) const { return components_[c]; }
  std::size_t component_count() const { return components_.size(); }
  Family family(std::size_t c) const { return families_[c]; }

 private:
  std::shared_ptr<const Grid> grid_;
  std::vector<Family> families_;
  std::vector<SpdSolver> components_;
  SpdSolver full_;
};

}  // namespace nehari
