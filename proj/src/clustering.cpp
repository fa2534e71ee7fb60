#include "selfot/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "selfot/mixture_model.hpp"
#include "selfot/parallel.hpp"
#include "selfot/transport_core.hpp"

namespace selfot {

namespace {

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> symmetric_eigen(const Matrix& plan,
                                                               bool vectors) {
  if (plan.rows() != plan.cols()) throw InvalidArgument("plan must be square");
  const Eigen::MatrixXd sym = 0.5 * (plan + plan.transpose());
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(
      sym, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
}

IntVector renumber_by_appearance(const IntVector& labels) {
  std::vector<int> map;
  IntVector out(labels.size());
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    const int l = labels(i);
    if (l >= static_cast<int>(map.size())) map.resize(l + 1, -1);
    if (map[l] < 0) map[l] = *std::max_element(map.begin(), map.end()) + 1;
    out(i) = map[l];
  }
  return out;
}

double sq_dist(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index k) {
  return (a.row(i) - b.row(k)).squaredNorm();
}

KMeansResult lloyd(const Matrix& data, Matrix centres, const KMeansOptions& opts) {
  const Eigen::Index n = data.rows();
  const Eigen::Index K = centres.rows();
  KMeansResult r;
  r.labels = IntVector::Zero(n);
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opts.max_iter; ++it) {
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index k = 0; k < K; ++k) {
        const double d2 = sq_dist(data, i, centres, k);
        if (d2 < best) {
          best = d2;
          r.labels(i) = static_cast<int>(k);
        }
      }
      inertia += best;
    }
    Matrix sums = Matrix::Zero(K, data.cols());
    IntVector sizes = IntVector::Zero(K);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(r.labels(i)) += data.row(i);
      ++sizes(r.labels(i));
    }
    for (Eigen::Index k = 0; k < K; ++k)
      if (sizes(k) > 0) centres.row(k) = sums.row(k) / sizes(k);  // empty clusters keep their centre
    r.inertia = inertia;
    if (std::isfinite(prev) && std::abs(prev - inertia) <= opts.rel_tol * std::max(prev, 1e-300)) break;
    prev = inertia;
  }
  // Final assignment against the final centres.
  r.inertia = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < K; ++k) {
      const double d2 = sq_dist(data, i, centres, k);
      if (d2 < best) {
        best = d2;
        r.labels(i) = static_cast<int>(k);
      }
    }
    r.inertia += best;
  }
  r.centres = std::move(centres);
  return r;
}

Matrix kmeanspp_seeds(const Matrix& data, int K, std::mt19937_64& rng) {
  const Eigen::Index n = data.rows();
  Matrix centres(K, data.cols());
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  centres.row(0) = data.row(first(rng));
  Vector d2(n);
  for (Eigen::Index i = 0; i < n; ++i) d2(i) = sq_dist(data, i, centres, 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 1; k < K; ++k) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double target = unit(rng) * total;
      for (pick = 0; pick < n - 1; ++pick) {
        target -= d2(pick);
        if (target < 0.0) break;
      }
    } else {
      pick = first(rng);
    }
    centres.row(k) = data.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) d2(i) = std::min(d2(i), sq_dist(data, i, centres, k));
  }
  return centres;
}

}  // namespace

SpectrumEstimate estimate_K(const Matrix& plan) {
  auto es = symmetric_eigen(plan, false);
  SpectrumEstimate out;
  out.spectrum = es.eigenvalues().reverse();
  std::vector<double> positive;
  for (Eigen::Index i = 0; i < out.spectrum.size(); ++i)
    if (out.spectrum(i) > 1e-12) positive.push_back(out.spectrum(i));
  positive.push_back(0.0);
  double best_gap = -1.0;
  for (std::size_t k = 0; k + 1 < positive.size(); ++k) {
    const double gap = positive[k] - positive[k + 1];
    if (gap > best_gap + 1e-12) {
      best_gap = gap;
      out.K_hat = static_cast<int>(k + 1);
    }
  }
  return out;
}

KMeansResult kmeans(const Matrix& data, int K, std::uint64_t seed, const KMeansOptions& opts) {
  if (K < 1) throw InvalidArgument("k-means needs K >= 1");
  if (K > data.rows()) throw InvalidArgument("k-means needs K <= n");
  std::mt19937_64 rng(seed);
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, opts.restarts); ++r) {
    KMeansResult run = lloyd(data, kmeanspp_seeds(data, K, rng), opts);
    if (run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

IntVector spectral_cluster(const Matrix& plan, int K, std::uint64_t seed) {
  const Eigen::Index n = plan.rows();
  if (K < 1) throw InvalidArgument("K must be positive");
  if (K > n) throw InvalidArgument("K must not exceed n");
  if (K == 1) return IntVector::Zero(n);
  auto es = symmetric_eigen(plan, true);
  // Eigenvalues ascend; the top K eigenvectors are the last K columns.
  Matrix embed = es.eigenvectors().rightCols(K);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double norm = embed.row(i).norm();
    if (norm > 0.0) embed.row(i) /= norm;
  }
  return renumber_by_appearance(kmeans(embed, K, seed).labels);
}

ParamEstimate estimate_params(const Matrix& points, const IntVector& labels) {
  const Eigen::Index n = points.rows();
  const Eigen::Index d = points.cols();
  if (labels.size() != n) throw InvalidArgument("labels must have one entry per point");
  if (n == 0) throw InvalidArgument("no points");
  if (labels.minCoeff() < 0) throw InvalidArgument("labels must be nonnegative");
  const int K = labels.maxCoeff() + 1;
  std::vector<long> sizes(K, 0);
  ParamEstimate est;
  est.means_hat.assign(K, Vector::Zero(d));
  for (Eigen::Index i = 0; i < n; ++i) {
    ++sizes[labels(i)];
    est.means_hat[labels(i)] += points.row(i).transpose();
  }
  for (int k = 0; k < K; ++k) {
    if (sizes[k] == 0) throw InvalidArgument("empty class in labels");
    est.means_hat[k] /= static_cast<double>(sizes[k]);
    est.theta_hat.push_back(static_cast<double>(sizes[k]) / static_cast<double>(n));
  }
  double ss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    ss += (points.row(i).transpose() - est.means_hat[labels(i)]).squaredNorm();
  est.sigma2_hat = ss / static_cast<double>(n * d);
  return est;
}

double implied_epsilon(long n, double sigma2_hat, const std::vector<double>& theta_hat, int K_hat) {
  if (!(sigma2_hat > 0.0)) return 0.0;
  return epsilon_star(n, sigma2_hat, theta_hat, K_hat).value;
}

ClusteringResult cluster_plan(const Matrix& plan, const Matrix& points, std::optional<int> K,
                              std::uint64_t seed) {
  if (plan.rows() != points.rows()) throw InvalidArgument("plan and points sizes differ");
  ClusteringResult res;
  SpectrumEstimate spec = estimate_K(plan);
  res.spectrum = spec.spectrum;
  const int k_use = K ? *K : spec.K_hat;
  // k-means may leave a class empty; the renumbering keeps labels contiguous.
  res.labels = spectral_cluster(plan, k_use, seed);
  res.K_hat = res.labels.maxCoeff() + 1;
  ParamEstimate est = estimate_params(points, res.labels);
  res.theta_hat = std::move(est.theta_hat);
  res.means_hat = std::move(est.means_hat);
  res.sigma2_hat = est.sigma2_hat;
  res.epsilon_implied =
      implied_epsilon(static_cast<long>(points.rows()), res.sigma2_hat, res.theta_hat, res.K_hat);
  return res;
}

double matched_accuracy(const IntVector& labels, const IntVector& truth) {
  if (labels.size() != truth.size()) throw InvalidArgument("label vectors differ in length");
  const Eigen::Index n = labels.size();
  if (n == 0) return 1.0;
  const int K = std::max(labels.maxCoeff(), truth.maxCoeff()) + 1;
  Eigen::MatrixXi confusion = Eigen::MatrixXi::Zero(K, K);
  for (Eigen::Index i = 0; i < n; ++i) ++confusion(labels(i), truth(i));

  long best = 0;
  if (K <= 6) {
    std::vector<int> perm(K);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      long hits = 0;
      for (int k = 0; k < K; ++k) hits += confusion(k, perm[k]);
      best = std::max(best, hits);
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    std::vector<char> row_used(K, 0), col_used(K, 0);
    for (int step = 0; step < K; ++step) {
      int bi = -1, bj = -1, bv = -1;
      for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j)
          if (!row_used[i] && !col_used[j] && confusion(i, j) > bv) {
            bv = confusion(i, j);
            bi = i;
            bj = j;
          }
      row_used[bi] = col_used[bj] = 1;
      best += bv;
    }
  }
  return static_cast<double>(best) / static_cast<double>(n);
}

GridSearchResult grid_search_sigma(const Matrix& points, const std::vector<double>& sigma2_grid,
                                   const std::vector<double>& entropy_grid,
                                   const std::vector<int>& K_grid, const SolverConfig& cfg,
                                   std::uint64_t seed, GridObjective objective) {
  if (sigma2_grid.empty() || entropy_grid.empty() || K_grid.empty())
    throw InvalidArgument("grid search needs non-empty grids");
  const Eigen::Index n = points.rows();
  const double nd = static_cast<double>(n * points.cols());
  const CostMatrix cost = cost_matrix(points);

  GridSearchResult out;
  for (double s2 : sigma2_grid)
    for (double h : entropy_grid)
      for (int k : K_grid) {
        GridPoint g;
        g.sigma2 = s2;
        g.entropy = h;
        g.K = k;
        g.epsilon = static_cast<double>(n) * s2 * h / k;
        out.trace.push_back(std::move(g));
      }

  parallel_for(out.trace.size(), [&](std::size_t idx) {
    GridPoint& g = out.trace[idx];
    try {
      if (!(g.sigma2 > 0.0)) throw InvalidArgument("sigma2 must be positive");
      if (g.K < 1 || g.K > n) throw InvalidArgument("K out of range");
      SolverConfig local = cfg;
      local.epsilon = g.epsilon;  // validate() rejects eps <= 0
      const TransportPlan plan = solve_quadratic(cost, local);
      if (!plan.diagnostics.converged) {
        g.failed = true;
        g.failure = "solver did not converge";
        return;
      }
      g.result = cluster_plan(plan.matrix, points, g.K, seed);
      double plug_in = 0.0;
      for (double t : g.result.theta_hat)
        if (t > 0.0) plug_in += t * std::log(t);
      const double sigma = std::sqrt(g.sigma2);
      const double fit = frobenius_inner(plan.matrix, cost.entries);
      if (objective == GridObjective::penalised)
        g.objective = -fit / g.sigma2 - nd * (std::log(sigma) - g.sigma2);
      else
        g.objective = -fit / (2.0 * g.sigma2) - nd * std::log(sigma);
      g.objective += static_cast<double>(n) * plug_in;
    } catch (const std::exception& e) {
      g.failed = true;
      g.failure = e.what();
    }
  });

  for (std::size_t i = 0; i < out.trace.size(); ++i) {
    if (out.trace[i].failed) continue;
    if (!out.best || out.trace[i].objective > out.trace[*out.best].objective) out.best = i;
  }
  return out;
}

}  // namespace selfot
