#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "selfot/mixture_model.hpp"
#include "selfot/qot_solver.hpp"
#include "selfot/transport_core.hpp"

namespace selfot {

// ---------------------------------------------------------------------------
// Mean-free distance identity
// ---------------------------------------------------------------------------

// Per-point error of the pairwise surrogate for |Y_i - mu_k|^2, k = class of i:
//   corrected[i] = sum_{j != i} Z_jk/(N_k - 1) |Y_i - Y_j|^2 - |Y_i - mu_k|^2 - d sigma2
//   printed[i]   = sum_{j != i} Z_jk/(N_k - 1) |Y_i - Y_j|^2 / (2 sigma2) - d sigma2 - |Y_i - mu_k|^2
// Only the corrected form is centred.
struct Prop1Errors {
  Vector corrected;
  Vector printed;
};
Prop1Errors prop1_errors(const Sample& sample, const std::vector<Vector>& means, double sigma2);

struct ScalingCell {
  long n = 0;
  int d = 0;
  int replications = 0;
  int redraws = 0;           // replications redrawn because of an empty or singleton cluster
  double median_abs = 0.0;   // median of |err| sqrt(n/d)
  double p90_abs = 0.0;      // 90th percentile of |err| sqrt(n/d)
  double mean = 0.0;         // mean of err sqrt(n/d)
  double std_error = 0.0;    // from per-replication means
  double printed_median_abs = 0.0;  // same scaling, printed form
  std::vector<std::uint64_t> seeds;
};

struct ScalingReport {
  std::vector<ScalingCell> cells;
  double median_ratio = 0.0;  // max/min of median_abs over cells
  bool bounded = false;       // median_ratio <= 3
  bool centred = false;       // |mean| <= 3 std_error in every cell
  bool passed() const { return bounded && centred; }
};

struct Prop1Config {
  // Means are given in a base dimension and zero-padded to each d in d_grid.
  MixtureSpec spec;
  std::vector<long> n_grid{50, 100, 200, 400};
  std::vector<int> d_grid{5, 20};
  int reps = 200;
  std::uint64_t seed = 1;
};

ScalingReport check_prop1(const Prop1Config& cfg);

// ---------------------------------------------------------------------------
// Heteroskedastic perturbation of the cost
// ---------------------------------------------------------------------------

// cost(corrupted) - cost(clean) = 0.5 (s 1^T + 1 s^T) + Diag(diagonal_part) + residual_E
// with s_i = |eta_i|^2 and residual_E hollow.
struct PerturbationDecomposition {
  Vector shift_vector;
  Vector diagonal_part;
  Matrix residual_E;
};

PerturbationDecomposition decompose_perturbation(const Matrix& clean_points, const Matrix& noise,
                                                 const Matrix& corrupted_points);

// Largest absolute entry of (reassembled pieces) - (cost(corrupted) - cost(clean)).
double reconstruction_error(const PerturbationDecomposition& dec, const CostMatrix& clean,
                            const CostMatrix& corrupted);

struct RobustnessRecord {
  double lhs = 0.0;  // |pi(C_clean) - pi(C_corrupted)|_F
  double rhs = 0.0;  // |E|_F / eps
  bool holds = false;
  bool converged = false;
};

// holds = lhs <= rhs + 10 tol.
RobustnessRecord check_robustness_bound(const CostMatrix& clean, const CostMatrix& corrupted,
                                        const Matrix& residual_E, const SolverConfig& cfg);

// Random symmetric PSD matrix Q diag(lambda) Q^T, lambda uniform in [0, max_eig],
// Q Haar-distributed.
Matrix random_psd(int d, double max_eig, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Oracle plan norm
// ---------------------------------------------------------------------------

struct FrobeniusRecord {
  double norm2 = 0.0;              // |oracle_plan(Z)|_F^2
  double identity = 0.0;           // sum_k N_k / (N_k - 1)
  double K_plus_correction = 0.0;  // K + sum_k 1/(N_k - 1), occupied clusters only
  bool holds = false;              // |norm2 - identity| <= 1e-10
};

FrobeniusRecord frobenius_identity_check(const IntMatrix& memberships);

// ---------------------------------------------------------------------------
// Quadratic vs entropic regulariser
// ---------------------------------------------------------------------------

struct ComparisonRecord {
  double quadratic_sparsity = 0.0;  // fraction of off-diagonal entries that are zero
  double entropic_min_offdiag = 0.0;
  double quadratic_distance = 0.0;  // |pi_Q - oracle|_F
  double entropic_distance = 0.0;   // |pi_KL - oracle|_F
  bool converged = false;
  // entropic strictly positive and quadratic at least as close to the oracle
  bool holds = false;
};

ComparisonRecord regulariser_comparison(const MixtureSpec& spec, long n, double epsilon_quadratic,
                                        double epsilon_entropic, std::uint64_t seed,
                                        double tol = 1e-8);

// Two-component isotropic mixture in R^d, means 0 and separation * e_1.
MixtureSpec two_cluster_spec(int d, double separation, double sigma2 = 1.0,
                             std::vector<double> theta = {0.5, 0.5});

// Sample with every occupied cluster of size >= 2, redrawing with seed + stride
// until it is. The number of redraws is stored in `redraws` when non-null.
Sample sample_without_singletons(const MixtureSpec& spec, long n, std::uint64_t seed,
                                 int* redraws = nullptr);

}  // namespace selfot
