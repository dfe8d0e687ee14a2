#include "nehari/decomposition.hpp"

#include "nehari/errors.hpp"

namespace nehari {

Field project_component(const Grid& g, const Field& u, const NodeMask& mask) {
  require_on_grid(g, u);
  const Vector Ku = g.stiffness() * u.values();
  Field rhs = Field::zero(g);
  for (Index i : mask) rhs[i] = Ku[i];
  return solve_spd(g, mask, rhs);
}

std::pair<Field, Field> split_signs(const Field& u) {
  return {positive_part(u), negative_part(u)};
}

Field positive_part(const Field& u) {
  return Field(u.values().cwiseMax(0.0), u.grid_id());
}

Field negative_part(const Field& u) {
  return Field((-u.values()).cwiseMax(0.0), u.grid_id());
}

namespace {

template <class Project>
Decomposition assemble(const Grid& g, const std::vector<Family>& families, const Field& u,
                       Project&& project) {
  Decomposition d;
  d.tilde = Field::zero(g);
  d.hat = Field::zero(g);
  d.bar_low = Field::zero(g);
  d.components.reserve(families.size());
  for (std::size_t c = 0; c < families.size(); ++c) {
    Field pc = project(c);
    switch (families[c]) {
      case Family::tilde: d.tilde += pc; break;
      case Family::hat: d.hat += pc; break;
      case Family::bar: d.bar_low += pc; break;
    }
    d.components.push_back(std::move(pc));
  }
  d.remainder = u - d.tilde - d.hat - d.bar_low;
  return d;
}

}  // namespace

Decomposition decompose(const Grid& g, const WeightField& w, const Field& u) {
  require_on_grid(g, u);
  if (w.grid_id != g.id()) throw GridMismatch("weight does not live on this grid");
  return assemble(g, w.families, u,
                  [&](std::size_t c) { return project_component(g, u, w.component_masks[c]); });
}

Decomposer::Decomposer(std::shared_ptr<const Grid> grid, const WeightField& weight)
    : grid_(std::move(grid)), families_(weight.families), full_(grid_, grid_->full_mask()) {
  if (weight.grid_id != grid_->id()) throw GridMismatch("weight does not live on this grid");
  components_.reserve(weight.component_masks.size());
  for (const NodeMask& m : weight.component_masks) components_.emplace_back(grid_, m);
}

Decomposition Decomposer::decompose(const Field& u) const {
  require_on_grid(*grid_, u);
  return assemble(*grid_, families_, u, [&](std::size_t c) { return components_[c].project(u); });
}

}  // namespace nehari
