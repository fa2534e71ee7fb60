#include "selfot/mixture_model.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "selfot/transport_core.hpp"

namespace selfot {

namespace {

void check_theta(const std::vector<double>& theta) {
  if (theta.empty()) throw InvalidArgument("theta must have at least one entry");
  double sum = 0.0;
  for (double t : theta) {
    if (!(t >= 0.0)) throw InvalidArgument("theta entries must be nonnegative");
    sum += t;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "theta must sum to 1 (got " << sum << ")";
    throw InvalidArgument(os.str());
  }
}

// Square root of a symmetric PSD matrix through its eigendecomposition; tiny
// negative eigenvalues (round-off) are clamped to zero.
Matrix psd_sqrt(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

void MixtureSpec::validate() const {
  check_theta(theta);
  if (means.size() != theta.size())
    throw InvalidArgument("means must have one vector per component (K)");
  const auto d = means.front().size();
  if (d == 0) throw InvalidArgument("means must have positive dimension");
  for (const auto& m : means)
    if (m.size() != d) throw InvalidArgument("all mean vectors must share dimension d");
  if (!(sigma2 > 0.0)) throw InvalidArgument("sigma2 must be positive");
  if (aniso) {
    if (aniso->size() != theta.size())
      throw InvalidArgument("aniso must have one matrix per component (K)");
    for (const auto& s : *aniso) {
      if (s.rows() != d || s.cols() != d)
        throw InvalidArgument("aniso matrices must be d x d");
      if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-10)
        throw InvalidArgument("aniso matrices must be symmetric");
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() < -1e-10)
        throw InvalidArgument("aniso matrices must be positive semi-definite");
    }
  }
}

IntVector Sample::labels() const {
  IntVector out(memberships.rows());
  for (Eigen::Index i = 0; i < memberships.rows(); ++i) {
    Eigen::Index k;
    memberships.row(i).maxCoeff(&k);
    out(i) = static_cast<int>(k);
  }
  return out;
}

Matrix Sample::clean_points() const {
  if (!noise) return points;
  return points - *noise;
}

double entropy(const std::vector<double>& theta) {
  double h = 0.0;
  for (double t : theta)
    if (t > 0.0) h -= t * std::log(t);
  return h;
}

IntMatrix memberships_from_labels(const IntVector& labels, int K) {
  if (K < 1) throw InvalidArgument("K must be positive");
  IntMatrix z = IntMatrix::Zero(labels.size(), K);
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels(i) < 0 || labels(i) >= K) throw InvalidArgument("label out of range [0, K)");
    z(i, labels(i)) = 1;
  }
  return z;
}

IntVector counts_of(const IntMatrix& memberships) {
  return memberships.colwise().sum().transpose();
}

Sample make_sample(Matrix points, IntMatrix memberships) {
  if (points.rows() != memberships.rows())
    throw InvalidArgument("points and memberships must have the same number of rows");
  for (Eigen::Index i = 0; i < memberships.rows(); ++i) {
    int ones = 0;
    for (Eigen::Index k = 0; k < memberships.cols(); ++k) {
      const int z = memberships(i, k);
      if (z != 0 && z != 1) throw InvalidArgument("memberships must be binary");
      ones += z;
    }
    if (ones != 1) throw InvalidArgument("each membership row must be one-hot");
  }
  Sample s;
  s.counts = counts_of(memberships);
  s.points = std::move(points);
  s.memberships = std::move(memberships);
  return s;
}

Sample sample_mixture(const MixtureSpec& spec, long n, std::uint64_t seed) {
  spec.validate();
  if (n < 2) throw InvalidArgument("n must be at least 2");
  const int K = spec.K();
  const int d = spec.dim();
  std::mt19937_64 rng(seed);

  std::discrete_distribution<int> pick(spec.theta.begin(), spec.theta.end());
  IntVector labels(n);
  for (long i = 0; i < n; ++i) labels(i) = pick(rng);

  std::normal_distribution<double> gauss(0.0, 1.0);
  const double sd = std::sqrt(spec.sigma2);
  Matrix points(n, d);
  for (long i = 0; i < n; ++i) {
    const Vector& mu = spec.means[labels(i)];
    for (int c = 0; c < d; ++c) points(i, c) = mu(c) + sd * gauss(rng);
  }

  std::optional<Matrix> noise;
  if (spec.aniso) {
    std::vector<Matrix> roots;
    roots.reserve(K);
    for (const auto& s : *spec.aniso) roots.push_back(psd_sqrt(s));
    Matrix eta(n, d);
    Vector z(d);
    for (long i = 0; i < n; ++i) {
      for (int c = 0; c < d; ++c) z(c) = gauss(rng);
      eta.row(i) = (roots[labels(i)] * z).transpose();
    }
    points += eta;
    noise = std::move(eta);
  }

  Sample out = make_sample(std::move(points), memberships_from_labels(labels, K));
  out.noise = std::move(noise);
  return out;
}

double log_likelihood(const Sample& sample, const std::vector<Vector>& means,
                      const std::vector<double>& theta, double sigma) {
  const int K = sample.K();
  if (static_cast<int>(theta.size()) != K || static_cast<int>(means.size()) != K)
    throw InvalidArgument("theta and means must have K entries");
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
  for (const auto& m : means)
    if (m.size() != sample.dim()) throw InvalidArgument("mean dimension mismatch");

  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  double ll = 0.0;
  for (Eigen::Index i = 0; i < sample.n(); ++i) {
    for (int k = 0; k < K; ++k) {
      if (sample.memberships(i, k) == 0) continue;
      if (theta[k] <= 0.0)
        throw InvalidArgument("occupied component has theta_k = 0 (log-likelihood is -inf)");
      ll += std::log(theta[k]) - (sample.points.row(i) - means[k].transpose()).squaredNorm() * inv2s2;
    }
  }
  return ll - static_cast<double>(sample.n() * sample.dim()) * std::log(sigma);
}

double surrogate_likelihood(const Sample& sample, const std::vector<double>& theta,
                            double sigma) {
  const int K = sample.K();
  if (static_cast<int>(theta.size()) != K) throw InvalidArgument("theta must have K entries");
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");

  double fit = 0.0;
  double pair_term = 0.0;
  const IntVector labels = sample.labels();
  for (int k = 0; k < K; ++k) {
    const int nk = sample.counts(k);
    if (nk == 0) continue;
    if (nk == 1) throw InvalidArgument("occupied cluster with N_k = 1 (division by N_k - 1)");
    if (theta[k] <= 0.0)
      throw InvalidArgument("occupied component has theta_k = 0 (surrogate is -inf)");
    fit += nk * std::log(theta[k]);

    // sum over ordered pairs i != j in cluster k of |Y_i - Y_j|^2 = 2 N_k sum_i |Y_i - ybar|^2
    Eigen::RowVectorXd centre = Eigen::RowVectorXd::Zero(sample.dim());
    for (Eigen::Index i = 0; i < sample.n(); ++i)
      if (labels(i) == k) centre += sample.points.row(i);
    centre /= nk;
    double scatter = 0.0;
    for (Eigen::Index i = 0; i < sample.n(); ++i)
      if (labels(i) == k) scatter += (sample.points.row(i) - centre).squaredNorm();
    pair_term += 2.0 * nk * scatter / (nk - 1);
  }
  const double nd = static_cast<double>(sample.n() * sample.dim());
  return fit - pair_term / (2.0 * sigma * sigma) - nd * (std::log(sigma) - sigma * sigma);
}

TransportPlan oracle_plan(const IntMatrix& memberships) {
  const Eigen::Index n = memberships.rows();
  const IntVector counts = counts_of(memberships);
  for (Eigen::Index k = 0; k < counts.size(); ++k)
    if (counts(k) == 1) throw InvalidArgument("oracle plan undefined: cluster with N_k = 1");

  IntVector labels(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index k;
    if (memberships.row(i).sum() != 1) throw InvalidArgument("membership rows must be one-hot");
    memberships.row(i).maxCoeff(&k);
    labels(i) = static_cast<int>(k);
  }

  TransportPlan plan;
  plan.matrix = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && labels(i) == labels(j)) plan.matrix(i, j) = 1.0 / (counts(labels(i)) - 1);
  plan.regulariser = Regulariser::oracle;
  plan.diagnostics.iterations = 0;
  plan.diagnostics.marginal_violation = marginal_violation(plan.matrix);
  plan.diagnostics.zero_offdiag = count_zero_offdiag(plan.matrix);
  plan.diagnostics.converged = true;
  return plan;
}

EpsilonChoice epsilon_star(long n, double sigma2, const std::vector<double>& theta, int K) {
  check_theta(theta);
  if (n < 1) throw InvalidArgument("n must be positive");
  if (!(sigma2 > 0.0)) throw InvalidArgument("sigma2 must be positive");
  if (K != static_cast<int>(theta.size())) throw InvalidArgument("K must equal the length of theta");
  EpsilonChoice e;
  e.entropy_theta = entropy(theta);
  e.n = n;
  e.sigma2 = sigma2;
  e.K = K;
  e.value = static_cast<double>(n) * sigma2 * e.entropy_theta / K;
  e.degenerate = !(e.entropy_theta > 0.0);
  if (e.degenerate) e.value = 0.0;
  return e;
}

}  // namespace selfot
