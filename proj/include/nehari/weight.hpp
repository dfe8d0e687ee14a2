#pragma once

#include <vector>

#include "nehari/grid.hpp"
#include "nehari/problem_spec.hpp"

namespace nehari {

/// Nodal values of a = a+ - a- on a grid together with the subdomain masks.
struct WeightField {
  std::uint64_t grid_id = 0;
  Vector a_plus;
  Vector a_minus;
  std::vector<NodeMask> component_masks;  // aligned with ProblemSpec::components
  std::vector<Family> families;           // family of each component
  NodeMask negative_mask;

  /// sup |a| of the mu-free weight a = a+ - a-.
  double sup_norm() const;
  /// a+ - mu a-.
  Vector combined(double mu) const { return a_plus - mu * a_minus; }
  std::vector<int> family_indices(Family f) const;
};

/// Builtin continuous weight: on a component (l, r) a+ = amp * 4(x-l)(r-x)/(r-l)^2
/// (tensor product in 2D); off the closed union of components
/// a- = negative_amp * min(1, dist(x, union) / taper).
/// Throws SpecError when a component spans fewer than 3 cells on some axis and
/// GridMismatch when the grid was built on another domain.
WeightField build_weight(const ProblemSpec& spec, const Grid& grid);

}  // namespace nehari
