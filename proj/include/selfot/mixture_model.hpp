#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "selfot/types.hpp"

namespace selfot {

// Gaussian mixture with isotropic part sigma2 * I and optional per-component
// positive semi-definite extra covariance (Sigma_k = sigma2 * I + aniso[k]).
struct MixtureSpec {
  std::vector<double> theta;
  std::vector<Vector> means;
  double sigma2 = 1.0;
  std::optional<std::vector<Matrix>> aniso;

  int K() const { return static_cast<int>(theta.size()); }
  int dim() const { return means.empty() ? 0 : static_cast<int>(means.front().size()); }

  // Throws InvalidArgument naming the first violated invariant.
  void validate() const;
};

struct Sample {
  Matrix points;         // n x d
  IntMatrix memberships; // n x K, one-hot rows
  IntVector counts;      // column sums of memberships
  std::optional<Matrix> noise;  // realised heteroskedastic noise, n x d

  Eigen::Index n() const { return points.rows(); }
  Eigen::Index dim() const { return points.cols(); }
  int K() const { return static_cast<int>(memberships.cols()); }
  // Index of the single nonzero entry of each membership row.
  IntVector labels() const;
  // Points with the heteroskedastic noise removed (points itself when isotropic).
  Matrix clean_points() const;
};

struct EpsilonChoice {
  double value = 0.0;
  double entropy_theta = 0.0;
  long n = 0;
  double sigma2 = 0.0;
  int K = 0;
  bool degenerate = false;  // H(theta) == 0, value is 0 and no solver accepts it
};

// Shannon entropy -sum theta_k ln theta_k with 0 ln 0 = 0.
double entropy(const std::vector<double>& theta);

// Builds one-hot memberships from integer labels in [0, K).
IntMatrix memberships_from_labels(const IntVector& labels, int K);
IntVector counts_of(const IntMatrix& memberships);
Sample make_sample(Matrix points, IntMatrix memberships);

// Memberships are drawn first (one categorical draw per row), then the
// Gaussian coordinates row by row, then the anisotropic noise row by row.
Sample sample_mixture(const MixtureSpec& spec, long n, std::uint64_t seed);

// sum_i sum_k Z_ik (ln theta_k - |Y_i - mu_k|^2 / (2 sigma^2)) - n d log sigma
double log_likelihood(const Sample& sample, const std::vector<Vector>& means,
                      const std::vector<double>& theta, double sigma);

// Mean-free surrogate: uses within-cluster pairwise distances weighted by
// 1/(N_k - 1) in place of |Y_i - mu_k|^2, with penalty -n d (log sigma - sigma^2).
double surrogate_likelihood(const Sample& sample, const std::vector<double>& theta,
                            double sigma);

// pi_ij = sum_k 1{i != j} Z_ik Z_jk / (N_k - 1). Rejects occupied singleton clusters.
TransportPlan oracle_plan(const IntMatrix& memberships);

// epsilon = n sigma2 H(theta) / K.
EpsilonChoice epsilon_star(long n, double sigma2, const std::vector<double>& theta, int K);

}  // namespace selfot
