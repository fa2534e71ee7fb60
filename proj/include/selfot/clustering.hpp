#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "selfot/qot_solver.hpp"
#include "selfot/types.hpp"

namespace selfot {

struct SpectrumEstimate {
  int K_hat = 1;
  Vector spectrum;  // eigenvalues of (pi + pi^T)/2, descending
};

// Largest gap between consecutive positive eigenvalues of the symmetrised
// plan, with zero appended below the smallest positive one. For a plan made
// of K disconnected bistochastic blocks the top K eigenvalues are 1, so the
// gap sits right after them. Heuristic; ties resolve to the smallest K.
SpectrumEstimate estimate_K(const Matrix& plan);
inline SpectrumEstimate estimate_K(const TransportPlan& plan) { return estimate_K(plan.matrix); }

struct KMeansOptions {
  int restarts = 50;
  int max_iter = 300;
  double rel_tol = 1e-10;
};

struct KMeansResult {
  IntVector labels;
  Matrix centres;
  double inertia = 0.0;
};

// Lloyd iterations from k-means++ seeds, best inertia over the restarts.
KMeansResult kmeans(const Matrix& data, int K, std::uint64_t seed, const KMeansOptions& opts = {});

// Top-K eigenvectors of the symmetrised plan, rows normalised to unit length,
// clustered with kmeans. Labels are renumbered by first appearance.
IntVector spectral_cluster(const Matrix& plan, int K, std::uint64_t seed);
inline IntVector spectral_cluster(const TransportPlan& plan, int K, std::uint64_t seed) {
  return spectral_cluster(plan.matrix, K, seed);
}

struct ParamEstimate {
  std::vector<double> theta_hat;
  std::vector<Vector> means_hat;
  double sigma2_hat = 0.0;
};

// Class proportions, class means, and pooled variance sum |Y_i - mu_hat|^2 / (n d).
// Labels must cover 0..K-1 with no empty class.
ParamEstimate estimate_params(const Matrix& points, const IntVector& labels);

struct ClusteringResult {
  IntVector labels;
  int K_hat = 1;
  std::vector<double> theta_hat;
  std::vector<Vector> means_hat;
  double sigma2_hat = 0.0;
  double epsilon_implied = 0.0;
  Vector spectrum;
};

// n sigma2 H(theta) / K evaluated at the estimates (0 when sigma2_hat is 0).
double implied_epsilon(long n, double sigma2_hat, const std::vector<double>& theta_hat, int K_hat);

// Full recovery: K from the spectrum unless given, spectral labels, then
// parameter estimates and the implied epsilon.
ClusteringResult cluster_plan(const Matrix& plan, const Matrix& points, std::optional<int> K,
                              std::uint64_t seed);

// Fraction of agreeing labels after the best relabelling of `labels`:
// exhaustive over permutations for up to 6 classes, greedy above.
double matched_accuracy(const IntVector& labels, const IntVector& truth);

enum class GridObjective {
  // -<pi, C>/sigma2 - n d (log sigma - sigma2) + n sum theta_hat ln theta_hat.
  // The +n d sigma2 term makes this increasing in sigma2 once the plan settles.
  penalised,
  // -<pi, C>/(2 sigma2) - n d log sigma + n sum theta_hat ln theta_hat; the
  // Gaussian profile in sigma2, maximised near <pi, C>/(n d).
  profile,
};

struct GridPoint {
  double sigma2 = 0.0;
  double entropy = 0.0;
  int K = 1;
  double epsilon = 0.0;
  bool failed = false;
  std::string failure;
  double objective = 0.0;
  ClusteringResult result;
};

struct GridSearchResult {
  std::vector<GridPoint> trace;  // grid order: sigma2 outermost, then entropy, then K
  std::optional<std::size_t> best;
};

// For every (sigma2, H, K): eps = n sigma2 H / K, quadratic plan, spectral
// clustering with K classes, then the chosen objective (penalised by default).
// Points whose solve fails or does not converge are kept in the trace as failed.
GridSearchResult grid_search_sigma(const Matrix& points, const std::vector<double>& sigma2_grid,
                                   const std::vector<double>& entropy_grid,
                                   const std::vector<int>& K_grid, const SolverConfig& cfg,
                                   std::uint64_t seed,
                                   GridObjective objective = GridObjective::penalised);

}  // namespace selfot
