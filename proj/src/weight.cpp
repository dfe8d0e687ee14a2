#include "nehari/weight.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nehari/errors.hpp"

namespace nehari {

double WeightField::sup_norm() const {
  return std::max(a_plus.cwiseAbs().maxCoeff(), a_minus.cwiseAbs().maxCoeff());
}

std::vector<int> WeightField::family_indices(Family f) const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(families.size()); ++i)
    if (families[i] == f) out.push_back(i);
  return out;
}

WeightField build_weight(const ProblemSpec& spec, const Grid& grid) {
  if (!(grid.domain() == spec.domain)) throw GridMismatch("grid was built on another domain");
  const int dim = grid.dim();
  for (std::size_t c = 0; c < spec.components.size(); ++c) {
    for (int a = 0; a < dim; ++a) {
      if (spec.components[c].region.axes[a].length() < 3.0 * grid.h(a))
        throw SpecError("component " + std::to_string(c + 1) +
                        " is thinner than 3 mesh cells (under-resolved)");
    }
  }

  WeightField w;
  w.grid_id = grid.id();
  w.a_plus = Vector::Zero(grid.size());
  w.a_minus = Vector::Zero(grid.size());
  w.component_masks.resize(spec.components.size());
  for (const Component& c : spec.components) w.families.push_back(c.family);

  for (Index i = 0; i < grid.size(); ++i) {
    const auto x = grid.node(i);
    double dist = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < spec.components.size(); ++c) {
      const Component& comp = spec.components[c];
      if (comp.region.strictly_inside(x.data())) {
        double v = comp.amp;
        for (int a = 0; a < dim; ++a) {
          const Interval& I = comp.region.axes[a];
          v *= 4.0 * (x[a] - I.lo) * (I.hi - x[a]) / (I.length() * I.length());
        }
        w.a_plus[i] = v;
        w.component_masks[c].push_back(i);
      }
      dist = std::min(dist, comp.region.distance(x.data()));
    }
    if (dist > 0.0) {
      w.a_minus[i] = spec.negative_amp * std::min(1.0, dist / spec.taper);
      w.negative_mask.push_back(i);
    }
  }
  return w;
}

}  // namespace nehari
