#include "selfot/validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "selfot/entropic_solver.hpp"
#include "selfot/parallel.hpp"

namespace selfot {

namespace {

constexpr std::uint64_t kRedrawStride = 0x9E3779B97F4A7C15ULL;

// Linear-interpolation quantile of an already sorted vector.
double quantile_sorted(const std::vector<double>& v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// |Y_i - Y_j|^2 for all pairs.
Matrix squared_distances(const Matrix& y) {
  const Vector sq = y.rowwise().squaredNorm();
  Matrix g = y * y.transpose();
  Matrix d2 = (-2.0 * g).colwise() + sq;
  d2.rowwise() += sq.transpose();
  d2 = d2.cwiseMax(0.0);
  d2.diagonal().setZero();
  return d2;
}

MixtureSpec embed_spec(const MixtureSpec& base, int d) {
  MixtureSpec s = base;
  s.aniso.reset();
  for (auto& m : s.means) {
    if (m.size() > d) throw InvalidArgument("grid dimension smaller than the mean dimension");
    Vector padded = Vector::Zero(d);
    padded.head(m.size()) = m;
    m = std::move(padded);
  }
  return s;
}

bool all_clusters_usable(const Sample& s, bool require_occupied) {
  for (Eigen::Index k = 0; k < s.counts.size(); ++k) {
    if (s.counts(k) == 1) return false;
    if (require_occupied && s.counts(k) == 0) return false;
  }
  return true;
}

}  // namespace

Prop1Errors prop1_errors(const Sample& sample, const std::vector<Vector>& means, double sigma2) {
  const Eigen::Index n = sample.n();
  const double d = static_cast<double>(sample.dim());
  const IntVector labels = sample.labels();
  const Matrix d2 = squared_distances(sample.points);
  Prop1Errors out;
  out.corrected.resize(n);
  out.printed.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int k = labels(i);
    const int nk = sample.counts(k);
    if (nk < 2) throw InvalidArgument("point in a singleton cluster");
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i && labels(j) == k) s += d2(i, j);
    s /= static_cast<double>(nk - 1);
    const double to_mean = (sample.points.row(i) - means[k].transpose()).squaredNorm();
    out.corrected(i) = s - to_mean - d * sigma2;
    out.printed(i) = s / (2.0 * sigma2) - d * sigma2 - to_mean;
  }
  return out;
}

ScalingReport check_prop1(const Prop1Config& cfg) {
  cfg.spec.validate();
  if (cfg.reps < 1) throw InvalidArgument("reps must be at least 1");
  if (cfg.spec.aniso) throw InvalidArgument("the mean-free identity check needs an isotropic spec");
  for (long n : cfg.n_grid)
    for (double t : cfg.spec.theta)
      if (static_cast<double>(n) * t < 4.0)
        throw InvalidArgument("some cluster is expected to hold fewer than 4 points (n theta_k < 4)");

  ScalingReport report;
  std::size_t cell_index = 0;
  for (long n : cfg.n_grid) {
    for (int d : cfg.d_grid) {
      const MixtureSpec spec = embed_spec(cfg.spec, d);
      const double scale = std::sqrt(static_cast<double>(n) / static_cast<double>(d));
      ScalingCell cell;
      cell.n = n;
      cell.d = d;
      cell.replications = cfg.reps;
      cell.seeds.resize(cfg.reps);

      std::vector<Prop1Errors> errs(cfg.reps);
      std::vector<int> redraws(cfg.reps, 0);
      parallel_for(static_cast<std::size_t>(cfg.reps), [&](std::size_t r) {
        std::uint64_t seed = cfg.seed + 1000003ULL * cell_index + r;
        Sample s = sample_mixture(spec, n, seed);
        while (!all_clusters_usable(s, true)) {
          ++redraws[r];
          seed += kRedrawStride;
          s = sample_mixture(spec, n, seed);
        }
        cell.seeds[r] = seed;
        errs[r] = prop1_errors(s, spec.means, spec.sigma2);
      });

      std::vector<double> abs_scaled, abs_printed, rep_means;
      double total = 0.0;
      std::size_t count = 0;
      for (int r = 0; r < cfg.reps; ++r) {
        cell.redraws += redraws[r];
        double rep_sum = 0.0;
        for (Eigen::Index i = 0; i < errs[r].corrected.size(); ++i) {
          const double v = errs[r].corrected(i) * scale;
          abs_scaled.push_back(std::abs(v));
          abs_printed.push_back(std::abs(errs[r].printed(i) * scale));
          rep_sum += v;
          total += v;
          ++count;
        }
        rep_means.push_back(rep_sum / static_cast<double>(errs[r].corrected.size()));
      }
      std::sort(abs_scaled.begin(), abs_scaled.end());
      std::sort(abs_printed.begin(), abs_printed.end());
      cell.median_abs = quantile_sorted(abs_scaled, 0.5);
      cell.p90_abs = quantile_sorted(abs_scaled, 0.9);
      cell.printed_median_abs = quantile_sorted(abs_printed, 0.5);
      cell.mean = total / static_cast<double>(count);
      if (cfg.reps > 1) {
        double mm = 0.0;
        for (double m : rep_means) mm += m;
        mm /= static_cast<double>(rep_means.size());
        double var = 0.0;
        for (double m : rep_means) var += (m - mm) * (m - mm);
        var /= static_cast<double>(rep_means.size() - 1);
        cell.std_error = std::sqrt(var / static_cast<double>(rep_means.size()));
      } else {
        cell.std_error = std::numeric_limits<double>::infinity();
      }
      report.cells.push_back(std::move(cell));
      ++cell_index;
    }
  }

  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  report.centred = true;
  for (const auto& c : report.cells) {
    lo = std::min(lo, c.median_abs);
    hi = std::max(hi, c.median_abs);
    if (std::abs(c.mean) > 3.0 * c.std_error) report.centred = false;
  }
  report.median_ratio = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  report.bounded = report.median_ratio <= 3.0;
  return report;
}

PerturbationDecomposition decompose_perturbation(const Matrix& clean_points, const Matrix& noise,
                                                 const Matrix& corrupted_points) {
  if (clean_points.rows() != noise.rows() || clean_points.cols() != noise.cols() ||
      corrupted_points.rows() != noise.rows() || corrupted_points.cols() != noise.cols())
    throw InvalidArgument("clean points, noise and corrupted points must have the same shape");
  const double mismatch = (corrupted_points - clean_points - noise).cwiseAbs().maxCoeff();
  const double scale = 1.0 + corrupted_points.cwiseAbs().maxCoeff();
  if (mismatch > 1e-12 * scale)
    throw InvalidArgument("corrupted points must equal clean points plus noise");

  const Eigen::Index n = clean_points.rows();
  const Matrix delta = cost_matrix(corrupted_points).entries - cost_matrix(clean_points).entries;
  PerturbationDecomposition dec;
  dec.shift_vector = noise.rowwise().squaredNorm();
  dec.residual_E = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j)
        dec.residual_E(i, j) = delta(i, j) - 0.5 * (dec.shift_vector(i) + dec.shift_vector(j));
  // delta has a zero diagonal, where the shift contributes s_i.
  dec.diagonal_part = delta.diagonal() - dec.shift_vector;
  return dec;
}

double reconstruction_error(const PerturbationDecomposition& dec, const CostMatrix& clean,
                            const CostMatrix& corrupted) {
  const Vector zero = Vector::Zero(dec.shift_vector.size());
  const Vector half = 0.5 * dec.shift_vector;
  const CostMatrix rebuilt = shift_cost(clean, half, half, dec.diagonal_part);
  return (rebuilt.entries + dec.residual_E - corrupted.entries).cwiseAbs().maxCoeff();
}

RobustnessRecord check_robustness_bound(const CostMatrix& clean, const CostMatrix& corrupted,
                                        const Matrix& residual_E, const SolverConfig& cfg) {
  const TransportPlan a = solve_quadratic(clean, cfg);
  const TransportPlan b = solve_quadratic(corrupted, cfg);
  RobustnessRecord r;
  r.lhs = (a.matrix - b.matrix).norm();
  r.rhs = residual_E.norm() / cfg.epsilon;
  r.holds = r.lhs <= r.rhs + 10.0 * cfg.tol;
  r.converged = a.diagnostics.converged && b.diagnostics.converged;
  return r;
}

Matrix random_psd(int d, double max_eig, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, max_eig);
  Eigen::MatrixXd g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = gauss(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  // Sign fix makes Q Haar-distributed.
  const Eigen::MatrixXd rmat = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j)
    if (rmat(j, j) < 0.0) q.col(j) *= -1.0;
  Vector lambda(d);
  for (int i = 0; i < d; ++i) lambda(i) = unit(rng);
  Matrix s = q * lambda.asDiagonal() * q.transpose();
  return 0.5 * (s + s.transpose());
}

FrobeniusRecord frobenius_identity_check(const IntMatrix& memberships) {
  const TransportPlan plan = oracle_plan(memberships);
  const IntVector counts = counts_of(memberships);
  FrobeniusRecord rec;
  rec.norm2 = plan.matrix.squaredNorm();
  int occupied = 0;
  double correction = 0.0;
  for (Eigen::Index k = 0; k < counts.size(); ++k) {
    if (counts(k) == 0) continue;
    ++occupied;
    rec.identity += static_cast<double>(counts(k)) / static_cast<double>(counts(k) - 1);
    correction += 1.0 / static_cast<double>(counts(k) - 1);
  }
  rec.K_plus_correction = occupied + correction;
  rec.holds = std::abs(rec.norm2 - rec.identity) <= 1e-10;
  return rec;
}

MixtureSpec two_cluster_spec(int d, double separation, double sigma2, std::vector<double> theta) {
  MixtureSpec s;
  s.theta = std::move(theta);
  s.sigma2 = sigma2;
  s.means = {Vector::Zero(d), Vector::Zero(d)};
  s.means[1](0) = separation;
  return s;
}

Sample sample_without_singletons(const MixtureSpec& spec, long n, std::uint64_t seed, int* redraws) {
  int count = 0;
  Sample s = sample_mixture(spec, n, seed);
  while (!all_clusters_usable(s, false)) {
    ++count;
    seed += kRedrawStride;
    s = sample_mixture(spec, n, seed);
  }
  if (redraws) *redraws = count;
  return s;
}

ComparisonRecord regulariser_comparison(const MixtureSpec& spec, long n, double epsilon_quadratic,
                                        double epsilon_entropic, std::uint64_t seed, double tol) {
  const Sample s = sample_without_singletons(spec, n, seed);
  const CostMatrix c = cost_matrix(s.points);
  const TransportPlan oracle = oracle_plan(s.memberships);

  SolverConfig qc;
  qc.epsilon = epsilon_quadratic;
  qc.tol = tol;
  SolverConfig ec = qc;
  ec.epsilon = epsilon_entropic;
  const TransportPlan q = solve_quadratic(c, qc);
  const TransportPlan e = solve_entropic(c, ec);

  ComparisonRecord rec;
  const double offdiag = static_cast<double>(n * (n - 1));
  rec.quadratic_sparsity = static_cast<double>(q.diagnostics.zero_offdiag) / offdiag;
  rec.entropic_min_offdiag = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) rec.entropic_min_offdiag = std::min(rec.entropic_min_offdiag, e.matrix(i, j));
  rec.quadratic_distance = (q.matrix - oracle.matrix).norm();
  rec.entropic_distance = (e.matrix - oracle.matrix).norm();
  rec.converged = q.diagnostics.converged && e.diagnostics.converged;
  rec.holds = rec.entropic_min_offdiag > 0.0 && rec.quadratic_distance <= rec.entropic_distance;
  return rec;
}

}  // namespace selfot
