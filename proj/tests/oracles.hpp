#pragma once

// Reference implementations written directly from the formulas, kept apart
// from the library so the two can disagree.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "selfot/types.hpp"

namespace ref {

using selfot::IntMatrix;
using selfot::IntVector;
using selfot::Matrix;
using selfot::Vector;

inline Matrix random_matrix(int rows, int cols, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = u(rng);
  return m;
}

inline Matrix gaussian_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = g(rng);
  return m;
}

// Symmetric nonnegative hollow cost with uniform entries.
inline Matrix random_cost(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(0.0, scale);
  Matrix c = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) c(i, j) = c(j, i) = u(rng);
  return c;
}

inline Matrix naive_cost(const Matrix& y) {
  const int n = static_cast<int>(y.rows());
  Matrix c(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int t = 0; t < y.cols(); ++t) s += (y(i, t) - y(j, t)) * (y(i, t) - y(j, t));
      c(i, j) = 0.5 * s;
    }
  return c;
}

inline int label_of(const IntMatrix& z, int i) {
  for (int k = 0; k < z.cols(); ++k)
    if (z(i, k) == 1) return k;
  return -1;
}

// Literal double loop of the mean-free surrogate.
inline double naive_surrogate(const Matrix& y, const IntMatrix& z, const std::vector<double>& theta,
                              double sigma) {
  const int n = static_cast<int>(y.rows()), d = static_cast<int>(y.cols()), K = static_cast<int>(z.cols());
  std::vector<int> N(K, 0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < K; ++k) N[k] += z(i, k);
  double out = 0.0;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < K; ++k)
      if (z(i, k)) out += std::log(theta[k]);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      double dist2 = 0.0;
      for (int t = 0; t < d; ++t) dist2 += (y(i, t) - y(j, t)) * (y(i, t) - y(j, t));
      for (int k = 0; k < K; ++k)
        if (z(i, k) && z(j, k)) out -= dist2 / (N[k] - 1) / (2.0 * sigma * sigma);
    }
  out -= n * d * (std::log(sigma) - sigma * sigma);
  return out;
}

inline double naive_loglik(const Matrix& y, const IntMatrix& z, const std::vector<Vector>& mu,
                           const std::vector<double>& theta, double sigma) {
  const int n = static_cast<int>(y.rows()), d = static_cast<int>(y.cols());
  double out = 0.0;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < z.cols(); ++k) {
      if (!z(i, k)) continue;
      double r2 = 0.0;
      for (int t = 0; t < d; ++t) r2 += (y(i, t) - mu[k](t)) * (y(i, t) - mu[k](t));
      out += std::log(theta[k]) - r2 / (2.0 * sigma * sigma);
    }
  return out - n * d * std::log(sigma);
}

// Affine projection onto {X : X 1 = 1, X^T 1 = 1, diag X = 0} by solving the
// KKT system of min |X - M|^2 over the n(n-1) free entries.
class HollowAffine {
 public:
  explicit HollowAffine(int n) : n_(n) {
    const int m = n * (n - 1);
    A_ = Matrix::Zero(2 * n, m);
    int col = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        idx_.push_back({i, j});
        A_(i, col) = 1.0;
        A_(n + j, col) = 1.0;
        ++col;
      }
    gram_ = (A_ * A_.transpose()).completeOrthogonalDecomposition();
  }

  Matrix project(const Matrix& m) const {
    Vector x(idx_.size());
    for (std::size_t t = 0; t < idx_.size(); ++t) x(t) = m(idx_[t].first, idx_[t].second);
    const Vector r = A_ * x - Vector::Ones(2 * n_);
    x -= A_.transpose() * gram_.solve(r);
    Matrix out = Matrix::Zero(n_, n_);
    for (std::size_t t = 0; t < idx_.size(); ++t) out(idx_[t].first, idx_[t].second) = x(t);
    return out;
  }

 private:
  int n_;
  Matrix A_;
  std::vector<std::pair<int, int>> idx_;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> gram_;
};

// Dykstra's alternating projections between the hollow affine set and the
// nonnegative orthant; converges to the Frobenius projection of m onto the
// hollow bistochastic set.
inline Matrix dykstra_projection(const Matrix& m, int iters = 200000, double tol = 1e-13) {
  const int n = static_cast<int>(m.rows());
  HollowAffine aff(n);
  Matrix x = m, p = Matrix::Zero(n, n), q = Matrix::Zero(n, n);
  for (int it = 0; it < iters; ++it) {
    const Matrix y = aff.project(x + p);
    p = x + p - y;
    const Matrix xn = (y + q).cwiseMax(0.0);
    q = y + q - xn;
    const double step = (xn - x).cwiseAbs().maxCoeff();
    x = xn;
    if (step < tol && it > 10) break;
  }
  for (int i = 0; i < n; ++i) x(i, i) = 0.0;
  return x;
}

// Plain Sinkhorn on the hollow kernel.
inline Matrix naive_sinkhorn(const Matrix& c, double eps, int iters = 100000, double tol = 1e-13) {
  const int n = static_cast<int>(c.rows());
  Matrix k(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) k(i, j) = i == j ? 0.0 : std::exp(-c(i, j) / eps);
  Vector r = Vector::Ones(n), s = Vector::Ones(n);
  for (int it = 0; it < iters; ++it) {
    r = (k * s).cwiseInverse();
    s = (k.transpose() * r).cwiseInverse();
    const Matrix p = r.asDiagonal() * k * s.asDiagonal();
    if ((p.rowwise().sum().array() - 1.0).abs().maxCoeff() < tol) break;
  }
  return r.asDiagonal() * k * s.asDiagonal();
}

// Best agreement over all label permutations, by enumeration.
inline double brute_accuracy(const IntVector& a, const IntVector& b) {
  const int K = std::max(a.maxCoeff(), b.maxCoeff()) + 1;
  std::vector<int> perm(K);
  std::iota(perm.begin(), perm.end(), 0);
  int best = 0;
  do {
    int hit = 0;
    for (int i = 0; i < a.size(); ++i) hit += perm[a(i)] == b(i);
    best = std::max(best, hit);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / a.size();
}

inline IntVector random_labels(int n, int K, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, K - 1);
  IntVector l(n);
  for (int i = 0; i < n; ++i) l(i) = pick(rng);
  return l;
}

inline Matrix random_orthogonal(int d, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian_matrix(d, d, rng));
  return Matrix(qr.householderQ());
}

}  // namespace ref
