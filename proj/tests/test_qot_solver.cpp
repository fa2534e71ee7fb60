#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "selfot/mixture_model.hpp"
#include "selfot/qot_solver.hpp"
#include "selfot/validation.hpp"

using namespace selfot;

namespace {

SolverConfig config(double eps, double tol = 1e-10) {
  SolverConfig c;
  c.epsilon = eps;
  c.tol = tol;
  c.max_iter = 100000;
  return c;
}

Matrix swap2() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

// KKT certificate: primal feasible plan of the form [u_i + v_j - C_ij]_+ / eps.
double kkt_gap(const CostMatrix& c, const TransportPlan& p, double eps) {
  const Vector& u = p.potentials->first;
  const Vector& v = p.potentials->second;
  double gap = 0.0;
  for (int i = 0; i < c.size(); ++i)
    for (int j = 0; j < c.size(); ++j) {
      if (i == j) continue;
      const double want = std::max(0.0, u(i) + v(j) - c.entries(i, j)) / eps;
      gap = std::max(gap, std::abs(want - p.matrix(i, j)));
    }
  return gap;
}

}  // namespace

TEST_CASE("threshold_root") {
  std::vector<double> b{0.0, 1.0, 5.0};
  // t - 0 = 0.5 on the first piece
  CHECK(threshold_root(b, 0.5) == doctest::Approx(0.5));
  b = {0.0, 1.0, 5.0};
  // (t) + (t - 1) = 3 -> t = 2
  CHECK(threshold_root(b, 3.0) == doctest::Approx(2.0));
  b = {2.0, 2.0, 2.0, 2.0};
  CHECK(threshold_root(b, 2.0) == doctest::Approx(2.5));

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> bp(1 + rep % 17);
    for (double& x : bp) x = u(rng);
    const std::vector<double> orig = bp;
    const double mass = 0.01 + std::abs(u(rng));
    const double t = threshold_root(bp, mass);
    double lhs = 0.0;
    for (double x : orig) lhs += std::max(t - x, 0.0);
    CHECK(lhs == doctest::Approx(mass).epsilon(1e-12));
  }
}

TEST_CASE("SolverConfig validation") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  c.epsilon = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c.epsilon = -1.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.tol = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.max_iter = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);

  std::mt19937_64 rng(1);
  const CostMatrix cost = cost_from_matrix(ref::random_cost(4, rng));
  CHECK_THROWS_AS(solve_quadratic(cost, config(0.0)), InvalidArgument);
}

TEST_CASE("solve_quadratic trivial examples") {
  std::mt19937_64 rng(5);
  for (double eps : {0.01, 1.0, 100.0}) {
    Matrix c2(2, 2);
    c2 << 0, 7.5, 7.5, 0;
    const TransportPlan p = solve_quadratic(cost_from_matrix(c2), config(eps));
    CHECK((p.matrix - swap2()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(p.regulariser == Regulariser::quadratic);
    REQUIRE(p.epsilon.has_value());
    CHECK(*p.epsilon == eps);

    for (int n : {3, 6, 11}) {
      Matrix c = Matrix::Constant(n, n, 2.5);
      c.diagonal().setZero();
      const TransportPlan q = solve_quadratic(cost_from_matrix(c), config(eps));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          CHECK(std::abs(q.matrix(i, j) - (i == j ? 0.0 : 1.0 / (n - 1))) <= 1e-9);
    }
  }
  CHECK_THROWS_AS(solve_quadratic(cost_from_matrix(Matrix::Zero(1, 1)), config(1.0)), InvalidArgument);
}

TEST_CASE("qp_oracle examples and limits") {
  CHECK((qp_oracle(cost_from_matrix(Matrix::Zero(2, 2)), 1.0).matrix - swap2()).cwiseAbs().maxCoeff() <=
        1e-12);
  Matrix c3 = Matrix::Constant(3, 3, 4.0);
  c3.diagonal().setZero();
  const Matrix p3 = qp_oracle(cost_from_matrix(c3), 0.3).matrix;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(std::abs(p3(i, j) - (i == j ? 0.0 : 0.5)) <= 1e-12);

  std::mt19937_64 rng(6);
  CHECK_THROWS_AS(qp_oracle(cost_from_matrix(ref::random_cost(9, rng)), 1.0), InvalidArgument);
  CHECK_THROWS_AS(qp_oracle(cost_from_matrix(ref::random_cost(3, rng)), 0.0), InvalidArgument);
}

TEST_CASE("qp_oracle enumeration and active set agree") {
  std::mt19937_64 rng(7);
  for (int n : {2, 3, 4})
    for (double eps : {0.05, 0.5, 5.0})
      for (int rep = 0; rep < 5; ++rep) {
        const CostMatrix c = cost_from_matrix(ref::random_matrix(n, n, rng));
        const Matrix a = qp_oracle(c, eps, OracleMethod::enumerate).matrix;
        const Matrix b = qp_oracle(c, eps, OracleMethod::active_set).matrix;
        CHECK((a - b).norm() <= 1e-9);
      }
}

TEST_CASE("solve_quadratic matches the oracles") {
  std::mt19937_64 rng(8);
  for (int n : {3, 4, 5})
    for (double eps : {0.1, 1.0, 10.0})
      for (int rep = 0; rep < 8; ++rep) {
        const CostMatrix c = cost_from_matrix(ref::random_cost(n, rng));
        const TransportPlan s = solve_quadratic(c, config(eps));
        CHECK(s.diagnostics.converged);
        const Matrix o = qp_oracle(c, eps).matrix;
        CHECK((s.matrix - o).norm() <= 1e-6);
        // Dykstra on -C/eps is a third, unrelated route to the same plan
        const Matrix d = ref::dykstra_projection(-c.entries / eps);
        CHECK((s.matrix - d).norm() <= 1e-6);
      }
}

TEST_CASE("asymmetric costs use the two-potential path") {
  std::mt19937_64 rng(9);
  for (int n : {3, 4, 5})
    for (int rep = 0; rep < 6; ++rep) {
      const CostMatrix c = cost_from_matrix(ref::random_matrix(n, n, rng, 0.0, 2.0));
      const TransportPlan s = solve_quadratic(c, config(0.5));
      CHECK(s.diagnostics.converged);
      CHECK((s.matrix - qp_oracle(c, 0.5).matrix).norm() <= 1e-6);
      CHECK(kkt_gap(c, s, 0.5) <= 1e-12);
    }

  // symmetric mode off on a symmetric cost still gives the same plan
  const CostMatrix c = cost_from_matrix(ref::random_cost(12, rng));
  SolverConfig cfg = config(0.2);
  const Matrix sym = solve_quadratic(c, cfg).matrix;
  cfg.symmetric_mode = false;
  CHECK((solve_quadratic(c, cfg).matrix - sym).norm() <= 1e-8);
}

TEST_CASE("plan is the thresholded potentials and feasible") {
  std::mt19937_64 rng(10);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 10 + 9 * rep;
    const Matrix y = ref::gaussian_matrix(n, 3, rng);
    const CostMatrix c = cost_matrix(y);
    const double eps = 0.5 + rep;
    const TransportPlan p = solve_quadratic(c, config(eps, 1e-9));
    CHECK(p.diagnostics.converged);
    CHECK(p.diagnostics.tol == 1e-9);
    CHECK(p.diagnostics.marginal_violation <= 1e-9);
    CHECK(marginal_violation(p.matrix) == doctest::Approx(p.diagnostics.marginal_violation).epsilon(1e-6));
    CHECK((p.matrix.diagonal().array() == 0.0).all());
    CHECK(p.matrix.minCoeff() >= 0.0);
    CHECK(p.diagnostics.zero_offdiag == count_zero_offdiag(p.matrix));
    REQUIRE(p.potentials.has_value());
    CHECK(kkt_gap(c, p, eps) <= 1e-12);
    CHECK((p.matrix - p.matrix.transpose()).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("non-convergence is flagged, not thrown") {
  std::mt19937_64 rng(11);
  const CostMatrix c = cost_matrix(ref::gaussian_matrix(40, 4, rng));
  SolverConfig cfg = config(0.05, 1e-14);
  cfg.max_iter = 1;
  const TransportPlan p = solve_quadratic(c, cfg);
  CHECK_FALSE(p.diagnostics.converged);
  CHECK(p.diagnostics.iterations == 1);
  CHECK(p.diagnostics.marginal_violation > 1e-14);
}

TEST_CASE("shift and diagonal perturbations leave the plan unchanged") {
  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 15; ++rep) {
    const int n = 6 + 3 * rep;
    const CostMatrix c = cost_matrix(ref::gaussian_matrix(n, 2, rng));
    const SolverConfig cfg = config(0.3 + 0.1 * rep, 1e-9);
    const Vector a = ref::gaussian_matrix(n, 1, rng).col(0) * 5.0;
    const Vector b = ref::gaussian_matrix(n, 1, rng).col(0) * 5.0;
    const Vector dg = ref::gaussian_matrix(n, 1, rng).col(0) * 5.0;
    const Matrix p0 = solve_quadratic(c, cfg).matrix;
    CHECK((solve_quadratic(shift_cost(c, a, b, dg), cfg).matrix - p0).norm() <= 10 * cfg.tol);
    // symmetric shift keeps the single-potential path
    CHECK((solve_quadratic(shift_cost(c, a, a, dg), cfg).matrix - p0).norm() <= 10 * cfg.tol);
  }
}

TEST_CASE("scale identity with the projection") {
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 5 + 4 * rep;
    const CostMatrix c = cost_matrix(ref::gaussian_matrix(n, 3, rng));
    const double eps = 0.2 * (rep + 1);
    const SolverConfig cfg = config(eps, 1e-9);
    const Matrix a = solve_quadratic(c, cfg).matrix;
    const Matrix b = project_hollow_bistochastic(-c.entries / eps, 1e-9, 100000).matrix;
    CHECK((a - b).norm() <= 10 * cfg.tol);
  }
}

TEST_CASE("project_hollow_bistochastic") {
  for (int n : {2, 3, 7}) {
    const Matrix p = project_hollow_bistochastic(Matrix::Zero(n, n)).matrix;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) CHECK(std::abs(p(i, j) - (i == j ? 0.0 : 1.0 / (n - 1))) <= 1e-9);
  }
  std::mt19937_64 rng(14);
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix m = ref::gaussian_matrix(5, 5, rng);
    const Matrix p = project_hollow_bistochastic(m, 1e-12).matrix;
    const Matrix pp = project_hollow_bistochastic(p, 1e-12).matrix;
    CHECK((pp - p).norm() <= 1e-8);
    CHECK((p - ref::dykstra_projection(m)).norm() <= 1e-6);
  }
  // a feasible input is its own projection
  IntVector lab(6);
  lab << 0, 0, 0, 1, 1, 1;
  const Matrix o = oracle_plan(memberships_from_labels(lab, 2)).matrix;
  CHECK((project_hollow_bistochastic(o, 1e-12).matrix - o).norm() <= 1e-8);
}

TEST_CASE("nonexpansiveness in the cost") {
  std::mt19937_64 rng(15);
  for (int rep = 0; rep < 30; ++rep) {
    const int n = 4 + rep % 20;
    const double eps = 0.1 + 0.2 * (rep % 7);
    const SolverConfig cfg = config(eps, 1e-10);
    const CostMatrix c1 = cost_from_matrix(ref::random_cost(n, rng, 3.0));
    const CostMatrix c2 = cost_from_matrix(ref::random_cost(n, rng, 3.0));
    const double lhs = (solve_quadratic(c1, cfg).matrix - solve_quadratic(c2, cfg).matrix).norm();
    const double rhs = (c1.entries - c2.entries).norm() / eps;
    CHECK(lhs <= rhs + 10 * cfg.tol);
  }
}

TEST_CASE("quadratic_objective and optimality against random feasible plans") {
  std::mt19937_64 rng(16);
  const int n = 6;
  const CostMatrix c = cost_from_matrix(ref::random_cost(n, rng));
  const double eps = 0.4;
  const Matrix opt = solve_quadratic(c, config(eps, 1e-12)).matrix;
  const double f_opt = quadratic_objective(c, opt, eps);
  double direct = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) direct += opt(i, j) * c.entries(i, j) + 0.5 * eps * opt(i, j) * opt(i, j);
  CHECK(f_opt == doctest::Approx(direct).epsilon(1e-13));
  for (int rep = 0; rep < 50; ++rep) {
    // convex combinations of permutation-free hollow plans: the projection of a random matrix
    const Matrix other = ref::dykstra_projection(ref::gaussian_matrix(n, n, rng));
    CHECK(quadratic_objective(c, other, eps) >= f_opt - 1e-9);
  }
}

TEST_CASE("quadratic plan on a separated mixture is sparse") {
  const MixtureSpec spec = two_cluster_spec(20, 10.0);
  const Sample s = sample_mixture(spec, 200, 3);
  SolverConfig cfg;
  cfg.epsilon = epsilon_star(200, 1.0, spec.theta, 2).value;
  const TransportPlan p = solve_quadratic(cost_matrix(s.points), cfg);
  CHECK(p.diagnostics.converged);
  CHECK(p.diagnostics.zero_offdiag > 0);
}
