#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <type_traits>
#include <memory>
#include <vector>

#include "nehari/problem_spec.hpp"

namespace nehari {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Sorted list of interior node indices.
using NodeMask = std::vector<Index>;

/// Uniform tensor grid of the interior nodes of a box with homogeneous
/// Dirichlet data. Nodes are numbered x-fastest in 2D.
///
/// The stiffness matrix is the P1 stiffness on the structured triangulation,
/// so that u^T K u is exactly the Dirichlet energy of the piecewise-linear
/// interpolant: tridiag(-1, 2, -1) / h in 1D and the 5-point stencil with
/// weights hy/hx, hx/hy in 2D. Quadrature weights are lumped (h, hx*hy).
class Grid {
 public:
  Grid(const Box& domain, int n);

  int dim() const { return domain_.dim; }
  int nodes_per_axis() const { return n_; }
  Index size() const { return size_; }
  double h(int axis = 0) const { return h_[axis]; }
  const Box& domain() const { return domain_; }
  const SparseMatrix& stiffness() const { return stiffness_; }
  const Vector& quadrature() const { return quad_; }
  std::uint64_t id() const { return id_; }

  /// Coordinates of node i (only the first dim() entries are meaningful).
  std::array<double, 2> node(Index i) const;
  Vector coordinates(int axis) const;

  NodeMask full_mask() const;

 private:
  Box domain_;
  int n_;
  Index size_;
  std::array<double, 2> h_{};
  SparseMatrix stiffness_;
  Vector quad_;
  std::uint64_t id_;
};

Grid build_grid(const Box& domain, int n);

/// Nodal coefficient vector of a function in the discrete H^1_0, tagged with
/// the id of the grid it lives on.
class Field {
 public:
  Field() = default;
  Field(Vector values, std::uint64_t grid_id) : values_(std::move(values)), grid_(grid_id) {}
  static Field zero(const Grid& g) { return Field(Vector::Zero(g.size()), g.id()); }

  const Vector& values() const { return values_; }
  Vector& values() { return values_; }
  std::uint64_t grid_id() const { return grid_; }
  Index size() const { return values_.size(); }
  double operator[](Index i) const { return values_[i]; }
  double& operator[](Index i) { return values_[i]; }

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(double s) {
    values_ *= s;
    return *this;
  }

 private:
  Vector values_;
  std::uint64_t grid_ = 0;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator-(Field a);
Field operator*(double s, Field a);
Field operator*(Field a, double s);

void require_same_grid(const Field& a, const Field& b);
void require_on_grid(const Grid& g, const Field& f);

/// <u, v> = u^T K v.
double inner_product(const Grid& g, const Field& u, const Field& v);
double norm(const Grid& g, const Field& u);

/// sum_i q_i * weight_i * |u_i|^p.
double weighted_p_integral(const Grid& g, const Vector& weight, const Field& u, double p);

/// Interpolant of a function of the node coordinates.
template <class F>
Field interpolate(const Grid& g, F&& f) {
  Vector v(g.size());
  for (Index i = 0; i < g.size(); ++i) {
    const auto x = g.node(i);
    if constexpr (std::is_invocable_v<F, double>) v[i] = f(x[0]);
    else v[i] = f(x[0], x[1]);
  }
  return Field(std::move(v), g.id());
}

/// K restricted to the rows and columns in mask.
SparseMatrix restrict_stiffness(const Grid& g, const NodeMask& mask);

/// Conjugate gradients (no preconditioner) on the masked stiffness system:
/// returns w supported on mask with (K w)|mask = rhs|mask. Relative residual
/// 1e-12, at most 10 * |mask| iterations; throws SolverFailure otherwise.
Field solve_spd(const Grid& g, const NodeMask& mask, const Field& rhs);

/// Prefactored (sparse Cholesky) solver for the masked stiffness system.
class SpdSolver {
 public:
  SpdSolver(std::shared_ptr<const Grid> grid, NodeMask mask);

  /// w supported on mask with (K w)|mask = rhs|mask.
  Field solve(const Field& rhs) const;
  /// The K-orthogonal projection onto fields vanishing off mask.
  Field project(const Field& u) const;

  const NodeMask& mask() const { return mask_; }
  const Grid& grid() const { return *grid_; }

 private:
  std::shared_ptr<const Grid> grid_;
  NodeMask mask_;
  std::shared_ptr<Eigen::SimplicialLLT<SparseMatrix>> llt_;
};

struct SobolevEstimate {
  double c = 0.0;           // returned bound (best ratio * 1.05, or fallback)
  double best_ratio = 0.0;  // largest ||v||_{L^p} / ||v|| seen over all iterates
  bool converged = false;
  int iterations = 0;
};

/// Upper estimate of the discrete Sobolev constant
/// sup ||v||_{L^p(q)} / ||v|| by constrained ascent (v <- K^{-1}(q |v|^{p-2} v),
/// renormalised) from 8 random starts, times a 1.05 safety factor. Falls back to
/// the analytic 1D bound when an ascent does not settle within the cap.
SobolevEstimate estimate_sobolev_constant(const Grid& g, double p, std::uint64_t seed = 0,
                                          int max_iterations = 2000);
double sobolev_constant(const Grid& g, double p, std::uint64_t seed = 0);

}  // namespace nehari
