#include "nehari/grid.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <cmath>
#include <cstring>
#include <random>

#include "nehari/errors.hpp"

namespace nehari {

namespace {

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t grid_hash(const Box& b, int n) {
  std::uint64_t h = 1469598103934665603ull;
  h = fnv1a(h, &b.dim, sizeof b.dim);
  h = fnv1a(h, &n, sizeof n);
  for (int a = 0; a < b.dim; ++a) {
    h = fnv1a(h, &b.axes[a].lo, sizeof(double));
    h = fnv1a(h, &b.axes[a].hi, sizeof(double));
  }
  return h;
}

}  // namespace

Grid::Grid(const Box& domain, int n) : domain_(domain), n_(n) {
  if (domain.dim != 1 && domain.dim != 2) throw Error("grid dimension must be 1 or 2");
  if (n < 1) throw Error("grid needs at least one interior node per axis");
  for (int a = 0; a < domain.dim; ++a) {
    if (!(domain.axes[a].length() > 0.0)) throw Error("grid domain is empty");
    h_[a] = domain.axes[a].length() / (n + 1);
  }
  id_ = grid_hash(domain, n);

  std::vector<Eigen::Triplet<double>> trip;
  if (dim() == 1) {
    size_ = n;
    const double w = 1.0 / h_[0];
    for (Index i = 0; i < n; ++i) {
      trip.emplace_back(i, i, 2.0 * w);
      if (i > 0) trip.emplace_back(i, i - 1, -w);
      if (i + 1 < n) trip.emplace_back(i, i + 1, -w);
    }
    quad_ = Vector::Constant(size_, h_[0]);
  } else {
    size_ = static_cast<Index>(n) * n;
    const double wx = h_[1] / h_[0];
    const double wy = h_[0] / h_[1];
    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i < n; ++i) {
        const Index k = i + n * j;
        trip.emplace_back(k, k, 2.0 * (wx + wy));
        if (i > 0) trip.emplace_back(k, k - 1, -wx);
        if (i + 1 < n) trip.emplace_back(k, k + 1, -wx);
        if (j > 0) trip.emplace_back(k, k - n, -wy);
        if (j + 1 < n) trip.emplace_back(k, k + n, -wy);
      }
    }
    quad_ = Vector::Constant(size_, h_[0] * h_[1]);
  }
  stiffness_.resize(size_, size_);
  stiffness_.setFromTriplets(trip.begin(), trip.end());
  stiffness_.makeCompressed();
}

std::array<double, 2> Grid::node(Index i) const {
  if (dim() == 1) return {domain_.axes[0].lo + (i + 1) * h_[0], 0.0};
  const Index ix = i % n_;
  const Index iy = i / n_;
  return {domain_.axes[0].lo + (ix + 1) * h_[0], domain_.axes[1].lo + (iy + 1) * h_[1]};
}

Vector Grid::coordinates(int axis) const {
  Vector out(size_);
  for (Index i = 0; i < size_; ++i) out[i] = node(i)[axis];
  return out;
}

NodeMask Grid::full_mask() const {
  NodeMask m(size_);
  for (Index i = 0; i < size_; ++i) m[i] = i;
  return m;
}

Grid build_grid(const Box& domain, int n) { return Grid(domain, n); }

Field& Field::operator+=(const Field& o) {
  require_same_grid(*this, o);
  values_ += o.values_;
  return *this;
}

Field& Field::operator-=(const Field& o) {
  require_same_grid(*this, o);
  values_ -= o.values_;
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator-(Field a) { return a *= -1.0; }
Field operator*(double s, Field a) { return a *= s; }
Field operator*(Field a, double s) { return a *= s; }

void require_same_grid(const Field& a, const Field& b) {
  if (a.grid_id() != b.grid_id() || a.size() != b.size())
    throw GridMismatch("fields live on different grids");
}

void require_on_grid(const Grid& g, const Field& f) {
  if (f.grid_id() != g.id() || f.size() != g.size())
    throw GridMismatch("field does not live on this grid");
}

double inner_product(const Grid& g, const Field& u, const Field& v) {
  require_on_grid(g, u);
  require_on_grid(g, v);
  return u.values().dot(g.stiffness() * v.values());
}

double norm(const Grid& g, const Field& u) { return std::sqrt(std::max(0.0, inner_product(g, u, u))); }

double weighted_p_integral(const Grid& g, const Vector& weight, const Field& u, double p) {
  require_on_grid(g, u);
  if (weight.size() != g.size()) throw GridMismatch("weight does not live on this grid");
  if (!(p > 0.0)) throw DomainError("exponent must be positive");
  double s = 0.0;
  const Vector& q = g.quadrature();
  for (Index i = 0; i < g.size(); ++i) {
    if (weight[i] == 0.0 || u[i] == 0.0) continue;
    s += q[i] * weight[i] * std::pow(std::abs(u[i]), p);
  }
  return s;
}

SparseMatrix restrict_stiffness(const Grid& g, const NodeMask& mask) {
  std::vector<Index> local(g.size(), -1);
  for (std::size_t k = 0; k < mask.size(); ++k) local[mask[k]] = static_cast<Index>(k);
  std::vector<Eigen::Triplet<double>> trip;
  const SparseMatrix& K = g.stiffness();
  for (std::size_t k = 0; k < mask.size(); ++k) {
    for (SparseMatrix::InnerIterator it(K, mask[k]); it; ++it) {
      const Index r = local[it.row()];
      if (r >= 0) trip.emplace_back(r, static_cast<Index>(k), it.value());
    }
  }
  SparseMatrix sub(static_cast<Index>(mask.size()), static_cast<Index>(mask.size()));
  sub.setFromTriplets(trip.begin(), trip.end());
  return sub;
}

Field solve_spd(const Grid& g, const NodeMask& mask, const Field& rhs) {
  require_on_grid(g, rhs);
  Field out = Field::zero(g);
  if (mask.empty()) return out;
  const SparseMatrix A = restrict_stiffness(g, mask);
  Vector b(static_cast<Index>(mask.size()));
  for (std::size_t k = 0; k < mask.size(); ++k) b[k] = rhs[mask[k]];
  if (b.isZero(0.0)) return out;

  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::IdentityPreconditioner> cg;
  cg.setTolerance(1e-12);
  cg.setMaxIterations(10 * A.rows());
  cg.compute(A);
  const Vector x = cg.solve(b);
  if (cg.info() != Eigen::Success || cg.error() > 1e-12) {
    throw SolverFailure("conjugate gradients did not converge: relative residual " +
                        std::to_string(cg.error()) + " after " + std::to_string(cg.iterations()) +
                        " iterations");
  }
  for (std::size_t k = 0; k < mask.size(); ++k) out[mask[k]] = x[k];
  return out;
}

SpdSolver::SpdSolver(std::shared_ptr<const Grid> grid, NodeMask mask)
    : grid_(std::move(grid)), mask_(std::move(mask)) {
  if (!mask_.empty()) {
    llt_ = std::make_shared<Eigen::SimplicialLLT<SparseMatrix>>(restrict_stiffness(*grid_, mask_));
    if (llt_->info() != Eigen::Success) throw SolverFailure("stiffness factorisation failed");
  }
}

Field SpdSolver::solve(const Field& rhs) const {
  require_on_grid(*grid_, rhs);
  Field out = Field::zero(*grid_);
  if (mask_.empty()) return out;
  Vector b(static_cast<Index>(mask_.size()));
  for (std::size_t k = 0; k < mask_.size(); ++k) b[k] = rhs[mask_[k]];
  const Vector x = llt_->solve(b);
  for (std::size_t k = 0; k < mask_.size(); ++k) out[mask_[k]] = x[k];
  return out;
}

Field SpdSolver::project(const Field& u) const {
  require_on_grid(*grid_, u);
  if (mask_.empty()) return Field::zero(*grid_);
  const SparseMatrix& K = grid_->stiffness();
  // Only the masked rows of K u are needed.
  Field rhs = Field::zero(*grid_);
  for (Index r : mask_) {
    double s = 0.0;
    for (SparseMatrix::InnerIterator it(K, r); it; ++it) s += it.value() * u[it.row()];
    rhs[r] = s;  // K symmetric: column r equals row r
  }
  return solve(rhs);
}

SobolevEstimate estimate_sobolev_constant(const Grid& g, double p, std::uint64_t seed,
                                          int max_iterations) {
  if (!(p >= 2.0)) throw DomainError("Sobolev estimate needs p >= 2");
  auto shared = std::make_shared<const Grid>(g);
  const SpdSolver full(shared, g.full_mask());
  const Vector ones = Vector::Ones(g.size());

  auto ratio = [&](const Field& v) {
    const double lp = std::pow(weighted_p_integral(g, ones, v, p), 1.0 / p);
    return lp / norm(g, v);
  };

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  SobolevEstimate est;
  est.converged = true;
  constexpr int kStarts = 8;
  for (int s = 0; s < kStarts; ++s) {
    Field v = Field::zero(g);
    for (Index i = 0; i < g.size(); ++i) {
      const double r = uni(rng);
      v[i] = (s % 2 == 0) ? std::abs(r) + 1e-3 : r;
    }
    v *= 1.0 / norm(g, v);
    double prev = ratio(v);
    est.best_ratio = std::max(est.best_ratio, prev);
    bool settled = false;
    for (int it = 0; it < max_iterations; ++it) {
      ++est.iterations;
      Field load = Field::zero(g);
      for (Index i = 0; i < g.size(); ++i)
        load[i] = g.quadrature()[i] * std::pow(std::abs(v[i]), p - 2.0) * v[i];
      v = full.solve(load);
      const double nv = norm(g, v);
      if (!(nv > 0.0)) break;
      v *= 1.0 / nv;
      const double cur = ratio(v);
      est.best_ratio = std::max(est.best_ratio, cur);
      if (std::abs(cur - prev) <= 1e-13 * cur) {
        settled = true;
        break;
      }
      prev = cur;
    }
    est.converged = est.converged && settled;
  }

  if (!est.converged) {
    if (g.dim() != 1) throw SolverFailure("Sobolev-constant ascent did not settle");
    const double L = g.domain().axes[0].length();
    est.c = std::max(0.5 * std::pow(L, 0.5 + 1.0 / p), 1.05 * est.best_ratio);
  } else {
    est.c = 1.05 * est.best_ratio;
  }
  return est;
}

double sobolev_constant(const Grid& g, double p, std::uint64_t seed) {
  return estimate_sobolev_constant(g, p, seed).c;
}

}  // namespace nehari
