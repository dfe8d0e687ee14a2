#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nehari/errors.hpp"
#include "support.hpp"

using namespace nehari;
using testing::random_field;
using testing::rel;

namespace {

constexpr double pi = std::numbers::pi;

Field sine(const Grid& g) {
  return interpolate(g, [](double x) { return std::sin(pi * x); });
}

/// Smallest eigenvalue of K v = lambda diag(q) v by inverse iteration.
double smallest_eigenvalue(const Grid& g) {
  const Eigen::MatrixXd k = testing::dense(g.stiffness());
  const auto llt = k.llt();
  Vector v = Vector::Ones(g.size());
  const Vector& q = g.quadrature();
  double lambda = 0.0;
  for (int it = 0; it < 500; ++it) {
    v = llt.solve(q.cwiseProduct(v));
    v /= v.norm();
    lambda = v.dot(k * v) / v.dot(q.cwiseProduct(v));
  }
  return lambda;
}

}  // namespace

TEST_CASE("1D stiffness stencils") {
  const Grid one(Box::interval(0, 1), 1);
  CHECK(one.h() == 0.5);
  CHECK(one.size() == 1);
  CHECK(one.stiffness().coeff(0, 0) == 4.0);

  const Grid three(Box::interval(0, 1), 3);
  const Eigen::MatrixXd k = testing::dense(three.stiffness());
  Eigen::MatrixXd expect(3, 3);
  expect << 8, -4, 0, -4, 8, -4, 0, -4, 8;
  CHECK((k - expect).norm() == 0.0);
  CHECK(three.quadrature().isApproxToConstant(0.25));

  CHECK_THROWS_AS(Grid(Box::interval(0, 1), 0), Error);
}

TEST_CASE("2D stiffness agrees with a dense stencil assembly") {
  const Grid g(Box::rectangle(0, 1, 0, 2), 3);
  const double hx = 0.25, hy = 0.5;
  Eigen::MatrixXd oracle = Eigen::MatrixXd::Zero(9, 9);
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) {
      const int r = i + 3 * j;
      oracle(r, r) = 2 * hy / hx + 2 * hx / hy;
      if (i > 0) oracle(r, r - 1) = -hy / hx;
      if (i < 2) oracle(r, r + 1) = -hy / hx;
      if (j > 0) oracle(r, r - 3) = -hx / hy;
      if (j < 2) oracle(r, r + 3) = -hx / hy;
    }
  const Eigen::MatrixXd k = testing::dense(g.stiffness());
  CHECK((k - oracle).norm() <= 1e-14);
  CHECK((oracle.array() != 0.0).count() == 33);
  CHECK(Grid(Box::rectangle(0, 1, 0, 1), 3).stiffness().nonZeros() == 33);
  CHECK(g.quadrature().isApproxToConstant(hx * hy));
  CHECK(g.node(5)[0] == doctest::Approx(0.75));
  CHECK(g.node(5)[1] == doctest::Approx(1.0));
}

TEST_CASE("stiffness is symmetric and positive definite") {
  std::mt19937_64 rng(7);
  for (const Box& box : {Box::interval(0, 1), Box::rectangle(0, 1, 0, 1)}) {
    const Grid g(box, 17);
    for (int t = 0; t < 10; ++t) {
      const Field u = random_field(g, rng), v = random_field(g, rng), w = random_field(g, rng);
      const double uv = inner_product(g, u, v), vu = inner_product(g, v, u);
      CHECK(std::abs(uv - vu) <= 1e-12 * norm(g, u) * norm(g, v));
      CHECK(inner_product(g, u, u) > 0.0);
      const double lin = inner_product(g, 2.0 * u + 3.0 * w, v);
      CHECK(std::abs(lin - (2 * uv + 3 * inner_product(g, w, v))) <=
            1e-12 * (norm(g, u) + norm(g, w)) * norm(g, v) * 5);
    }
  }
}

TEST_CASE("inner products of known functions") {
  const Grid g(Box::interval(0, 1), 7);
  const Field tent = interpolate(g, [](double x) { return 1.0 - std::abs(2 * x - 1); });
  CHECK(inner_product(g, tent, tent) == doctest::Approx(4.0).epsilon(1e-14));

  const Grid fine(Box::interval(0, 1), 512);
  const Field s = sine(fine);
  CHECK(std::abs(inner_product(fine, s, s) - pi * pi / 2) <= 1e-3);

  Field a = Field::zero(fine), b = Field::zero(fine);
  for (Index i = 10; i < 100; ++i) a[i] = std::sin(0.3 * i);
  for (Index i = 102; i < 300; ++i) b[i] = std::cos(0.1 * i);
  CHECK(inner_product(fine, a, b) == 0.0);

  CHECK_THROWS_AS(inner_product(fine, s, tent), GridMismatch);
}

TEST_CASE("weighted p-integrals") {
  const Grid g(Box::interval(0, 1), 512);
  const Field s = sine(g);
  const Vector one = Vector::Ones(g.size());
  CHECK(std::abs(weighted_p_integral(g, one, s, 4.0) - 3.0 / 8.0) <= 1e-3);
  CHECK(weighted_p_integral(g, Vector::Zero(g.size()), s, 4.0) == 0.0);
  CHECK(weighted_p_integral(g, one, Field::zero(g), 4.0) == 0.0);
  CHECK_THROWS_AS(weighted_p_integral(g, one, s, 0.0), DomainError);
  CHECK_THROWS_AS(weighted_p_integral(g, Vector::Ones(3), s, 4.0), GridMismatch);
}

TEST_CASE("refinement order of the energy of sin") {
  double err[3];
  int k = 0;
  for (int n : {128, 256, 512}) {
    const Grid g(Box::interval(0, 1), n);
    const Field s = sine(g);
    err[k++] = std::abs(inner_product(g, s, s) - pi * pi / 2);
  }
  // h halves roughly (n+1 doubles up to one node)
  const double order1 = std::log(err[0] / err[1]) / std::log(257.0 / 129.0);
  const double order2 = std::log(err[1] / err[2]) / std::log(513.0 / 257.0);
  CHECK(order1 >= 1.9);
  CHECK(order2 >= 1.9);
}

TEST_CASE("Sobolev constant, 1D unit interval") {
  for (double p : {3.0, 4.0, 6.0}) {
    const Grid g(Box::interval(0, 1), 255);
    const SobolevEstimate est = estimate_sobolev_constant(g, p, 3);
    const Field s = sine(g);
    const double ratio =
        std::pow(weighted_p_integral(g, Vector::Ones(g.size()), s, p), 1.0 / p) / norm(g, s);
    CHECK(est.c <= 0.5 * 1.05);
    CHECK(est.c >= ratio);
    CHECK(est.c >= est.best_ratio);
    std::mt19937_64 rng(11);
    for (int t = 0; t < 20; ++t) {
      const Field v = random_field(g, rng);
      CHECK(std::pow(weighted_p_integral(g, Vector::Ones(g.size()), v, p), 1.0 / p) <=
            est.c * norm(g, v));
    }
  }
}

TEST_CASE("Sobolev constant, p = 2 bounds the first eigenvalue") {
  for (const Box& box : {Box::interval(0, 1), Box::rectangle(0, 1, 0, 1)}) {
    const Grid g(box, box.dim == 1 ? 63 : 15);
    const double c = sobolev_constant(g, 2.0, 5);
    const double lambda = smallest_eigenvalue(g);
    CHECK(c * c >= 1.0 / lambda);
    CHECK(c * c <= 1.0 / lambda * 1.05 * 1.05 * (1 + 1e-9));
  }
}

TEST_CASE("solve_spd") {
  const Grid g(Box::interval(0, 1), 127);
  std::mt19937_64 rng(3);
  NodeMask mask;
  for (Index i = 20; i < 90; ++i) mask.push_back(i);
  Field w0 = Field::zero(g);
  for (Index i : mask) w0[i] = std::sin(0.1 * i) + 0.3;
  const Field rhs(g.stiffness() * w0.values(), g.id());
  const Field w = solve_spd(g, mask, rhs);
  CHECK((w.values() - w0.values()).norm() <= 1e-10 * w0.values().norm());

  const SpdSolver llt(std::make_shared<const Grid>(g), mask);
  CHECK((llt.solve(rhs).values() - w0.values()).norm() <= 1e-10 * w0.values().norm());

  // -w'' = 1: the three-point scheme is exact on quadratics
  const Field load(g.quadrature(), g.id());
  const Field x = solve_spd(g, g.full_mask(), load);
  const Field exact = interpolate(g, [](double t) { return 0.5 * t * (1 - t); });
  CHECK((x.values() - exact.values()).lpNorm<Eigen::Infinity>() <= 1e-10);

  CHECK(solve_spd(g, {}, rhs).values().isZero(0.0));

  const Field u = random_field(g, rng);
  const Field ku(g.stiffness() * u.values(), g.id());
  CHECK((solve_spd(g, g.full_mask(), ku).values() - u.values()).norm() <= 1e-10 * u.values().norm());
}

TEST_CASE("Field arithmetic keeps the grid tag") {
  const Grid a(Box::interval(0, 1), 15), b(Box::interval(0, 1), 16);
  CHECK(a.id() != b.id());
  CHECK(a.id() == Grid(Box::interval(0, 1), 15).id());
  Field u = Field::zero(a);
  CHECK_THROWS_AS(u += Field::zero(b), GridMismatch);
  CHECK_THROWS_AS(require_on_grid(b, u), GridMismatch);
  const Field v = 2.0 * (u + Field(Vector::Ones(15), a.id()));
  CHECK(v.grid_id() == a.id());
  CHECK(v.values().isApproxToConstant(2.0));
}
