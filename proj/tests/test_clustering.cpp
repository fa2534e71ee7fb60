#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "selfot/clustering.hpp"
#include "selfot/mixture_model.hpp"
#include "selfot/validation.hpp"

using namespace selfot;

namespace {

IntVector labels_of(std::initializer_list<int> v) {
  IntVector out(v.size());
  int i = 0;
  for (int x : v) out(i++) = x;
  return out;
}

Matrix uniform_plan(int n) {
  Matrix u = Matrix::Constant(n, n, 1.0 / (n - 1));
  u.diagonal().setZero();
  return u;
}

Matrix permute(const Matrix& m, const std::vector<int>& p) {
  Matrix out(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out(i, j) = m(p[i], p[j]);
  return out;
}

}  // namespace

TEST_CASE("estimate_K examples") {
  const IntVector lab = labels_of({0, 0, 0, 0, 1, 1, 1, 2, 2, 2});
  const SpectrumEstimate e = estimate_K(oracle_plan(memberships_from_labels(lab, 3)));
  CHECK(e.K_hat == 3);
  REQUIRE(e.spectrum.size() == 10);
  for (int t = 0; t < 3; ++t) CHECK(e.spectrum(t) == doctest::Approx(1.0));
  for (int t = 3; t < 10; ++t) CHECK(e.spectrum(t) < 0.0);
  for (int t = 1; t < 10; ++t) CHECK(e.spectrum(t) <= e.spectrum(t - 1));

  CHECK(estimate_K(uniform_plan(7)).K_hat == 1);
  CHECK(estimate_K(uniform_plan(2)).K_hat == 1);
}

TEST_CASE("estimate_K recovers the occupied cluster count of oracle plans") {
  std::mt19937_64 rng(41);
  for (int rep = 0; rep < 40; ++rep) {
    const int K = 1 + rep % 6, n = K + 1 + static_cast<int>(rng() % 40);
    IntVector lab;
    IntVector counts;
    do {
      lab = ref::random_labels(n, K, rng);
      counts = counts_of(memberships_from_labels(lab, K));
    } while ((counts.array() == 1).any());
    const int occupied = static_cast<int>((counts.array() > 0).count());
    CHECK(estimate_K(oracle_plan(memberships_from_labels(lab, K))).K_hat == occupied);
  }
}

TEST_CASE("spectral_cluster on oracle plans") {
  const IntVector lab = labels_of({1, 0, 1, 1, 0, 0, 1});
  const Matrix p = oracle_plan(memberships_from_labels(lab, 2)).matrix;
  const IntVector got = spectral_cluster(p, 2, 3);
  CHECK(matched_accuracy(got, lab) == 1.0);
  CHECK(got(0) == 0);  // renumbered by first appearance

  const IntVector one = spectral_cluster(p, 1, 3);
  CHECK((one.array() == 0).all());
  CHECK_THROWS_AS(spectral_cluster(p, 8, 3), InvalidArgument);
  CHECK_THROWS_AS(spectral_cluster(p, 0, 3), InvalidArgument);

  std::mt19937_64 rng(42);
  for (int rep = 0; rep < 10; ++rep) {
    const int K = 2 + rep % 4, n = 30;
    IntVector l;
    IntVector counts;
    do {
      l = ref::random_labels(n, K, rng);
      counts = counts_of(memberships_from_labels(l, K));
    } while ((counts.array() < 2).any());
    CHECK(ref::brute_accuracy(spectral_cluster(oracle_plan(memberships_from_labels(l, K)), K, rep), l) ==
          1.0);
  }
}

TEST_CASE("spectral_cluster is equivariant under permuting the plan") {
  const MixtureSpec spec = two_cluster_spec(5, 8.0);
  const Sample s = sample_mixture(spec, 60, 4);
  SolverConfig cfg;
  cfg.epsilon = epsilon_star(60, 1.0, spec.theta, 2).value;
  const Matrix p = solve_quadratic(cost_matrix(s.points), cfg).matrix;
  const IntVector base = spectral_cluster(p, 2, 1);
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<int> perm(60);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const IntVector got = spectral_cluster(permute(p, perm), 2, 1);
    IntVector back(60);
    for (int i = 0; i < 60; ++i) back(perm[i]) = got(i);
    CHECK(ref::brute_accuracy(back, base) == 1.0);
  }
}

TEST_CASE("kmeans") {
  Matrix x(6, 1);
  x << 0.0, 0.1, 0.2, 10.0, 10.1, 10.2;
  const KMeansResult r = kmeans(x, 2, 1);
  CHECK(r.labels(0) == r.labels(1));
  CHECK(r.labels(0) != r.labels(3));
  CHECK(r.inertia == doctest::Approx(4 * 0.01));
  CHECK_THROWS_AS(kmeans(x, 7, 1), InvalidArgument);
  CHECK_THROWS_AS(kmeans(x, 0, 1), InvalidArgument);
  const KMeansResult a = kmeans(x, 3, 9), b = kmeans(x, 3, 9);
  CHECK(a.labels == b.labels);
  CHECK(a.inertia == b.inertia);
}

TEST_CASE("matched_accuracy agrees with brute force") {
  CHECK(matched_accuracy(labels_of({1, 1, 0, 0}), labels_of({0, 0, 1, 1})) == 1.0);
  CHECK(matched_accuracy(labels_of({0, 0, 0, 1}), labels_of({0, 0, 1, 1})) == 0.75);
  std::mt19937_64 rng(43);
  for (int rep = 0; rep < 30; ++rep) {
    const int K = 2 + rep % 5;
    const IntVector a = ref::random_labels(25, K, rng), b = ref::random_labels(25, K, rng);
    CHECK(matched_accuracy(a, b) == ref::brute_accuracy(a, b));
  }
  CHECK_THROWS_AS(matched_accuracy(labels_of({0}), labels_of({0, 1})), InvalidArgument);
}

TEST_CASE("estimate_params") {
  Matrix y(4, 2);
  y << 0, 0, 0, 0, 1, 0, 1, 0;
  ParamEstimate p = estimate_params(y, labels_of({0, 0, 1, 1}));
  CHECK(p.theta_hat == std::vector<double>{0.5, 0.5});
  CHECK(p.means_hat[0] == Vector::Zero(2));
  CHECK(p.means_hat[1] == Vector::Unit(2, 0));
  CHECK(p.sigma2_hat == 0.0);

  p = estimate_params(y, labels_of({0, 0, 0, 0}));
  CHECK(p.theta_hat == std::vector<double>{1.0});
  CHECK(p.sigma2_hat == doctest::Approx(4 * 0.25 / 8.0));

  CHECK_THROWS_AS(estimate_params(y, labels_of({0, 0, 2, 2})), InvalidArgument);
  CHECK_THROWS_AS(estimate_params(y, labels_of({0, 0, 1})), InvalidArgument);

  MixtureSpec spec;
  spec.theta = {0.4, 0.6};
  spec.means = {Vector::Zero(10), Vector::Constant(10, 3.0)};
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Sample s = sample_mixture(spec, 500, seed);
    const ParamEstimate e = estimate_params(s.points, s.labels());
    CHECK(e.sigma2_hat >= 0.9);
    CHECK(e.sigma2_hat <= 1.1);
  }
}

TEST_CASE("cluster_plan on a separated mixture") {
  const MixtureSpec spec = two_cluster_spec(20, 10.0);
  const Sample s = sample_mixture(spec, 200, 11);
  SolverConfig cfg;
  cfg.epsilon = epsilon_star(200, 1.0, spec.theta, 2).value;
  const TransportPlan p = solve_quadratic(cost_matrix(s.points), cfg);
  const ClusteringResult r = cluster_plan(p.matrix, s.points, std::nullopt, 7);
  CHECK(r.K_hat == 2);
  CHECK(matched_accuracy(r.labels, s.labels()) >= 0.99);
  CHECK(r.theta_hat.size() == 2);
  CHECK(r.theta_hat[0] + r.theta_hat[1] == doctest::Approx(1.0));
  CHECK(r.sigma2_hat == doctest::Approx(1.0).epsilon(0.1));
  // bit-for-bit recomputation of the implied epsilon
  CHECK(r.epsilon_implied == epsilon_star(200, r.sigma2_hat, r.theta_hat, r.K_hat).value);
  CHECK(r.epsilon_implied == implied_epsilon(200, r.sigma2_hat, r.theta_hat, r.K_hat));
  for (int t = 0; t < 200; ++t) CHECK(r.labels(t) < r.K_hat);

  const ClusteringResult forced = cluster_plan(p.matrix, s.points, 1, 7);
  CHECK(forced.K_hat == 1);
  CHECK((forced.labels.array() == 0).all());
  CHECK(forced.epsilon_implied == 0.0);
}

TEST_CASE("grid_search_sigma") {
  const MixtureSpec spec = two_cluster_spec(10, 10.0, 2.0);
  const Sample s = sample_mixture(spec, 120, 13);
  const double h = entropy(spec.theta);
  const std::vector<double> grid{0.5, 1.0, 2.0, 4.0, 8.0};
  SolverConfig cfg;

  SUBCASE("profile objective picks the true variance within one step") {
    const GridSearchResult r =
        grid_search_sigma(s.points, grid, {h}, {2}, cfg, 1, GridObjective::profile);
    REQUIRE(r.best.has_value());
    CHECK(r.trace.size() == grid.size());
    const double picked = r.trace[*r.best].sigma2;
    CHECK(picked >= 1.0);
    CHECK(picked <= 4.0);
    CHECK(r.trace[*r.best].result.K_hat == 2);
  }
  SUBCASE("penalised objective increases with sigma2 along this grid") {
    const GridSearchResult r = grid_search_sigma(s.points, grid, {h}, {2}, cfg, 1);
    for (std::size_t t = 1; t < r.trace.size(); ++t)
      CHECK(r.trace[t].objective > r.trace[t - 1].objective);
  }
  SUBCASE("trace order and epsilon") {
    const GridSearchResult r = grid_search_sigma(s.points, {1.0, 2.0}, {0.5, h}, {1, 2}, cfg, 1);
    REQUIRE(r.trace.size() == 8);
    CHECK(r.trace[0].sigma2 == 1.0);
    CHECK(r.trace[0].entropy == 0.5);
    CHECK(r.trace[0].K == 1);
    CHECK(r.trace[1].K == 2);
    CHECK(r.trace[2].entropy == h);
    CHECK(r.trace[4].sigma2 == 2.0);
    for (const auto& g : r.trace) CHECK(g.epsilon == 120 * g.sigma2 * g.entropy / g.K);
  }
  SUBCASE("single point grid") {
    const GridSearchResult r = grid_search_sigma(s.points, {2.0}, {h}, {2}, cfg, 1);
    REQUIRE(r.best.has_value());
    CHECK(*r.best == 0);
    CHECK(r.trace[0].sigma2 == 2.0);
  }
  SUBCASE("degenerate entropy fails that point only") {
    const GridSearchResult r = grid_search_sigma(s.points, {2.0}, {0.0, h}, {2}, cfg, 1);
    REQUIRE(r.trace.size() == 2);
    CHECK(r.trace[0].failed);
    CHECK_FALSE(r.trace[0].failure.empty());
    CHECK_FALSE(r.trace[1].failed);
    CHECK(*r.best == 1);
  }
  SUBCASE("non-convergence is recorded") {
    SolverConfig tight;
    tight.max_iter = 1;
    tight.tol = 1e-15;
    const GridSearchResult r = grid_search_sigma(s.points, {2.0}, {h}, {2}, tight, 1);
    CHECK(r.trace[0].failed);
    CHECK_FALSE(r.best.has_value());
  }
  CHECK_THROWS_AS(grid_search_sigma(s.points, {}, {h}, {2}, cfg, 1), InvalidArgument);
}
