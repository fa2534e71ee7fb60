#include "selfot/qot_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace selfot {

void SolverConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw InvalidArgument("epsilon must be positive and finite");
  if (!(tol > 0.0)) throw InvalidArgument("tol must be positive");
  if (max_iter < 1) throw InvalidArgument("max_iter must be at least 1");
}

double threshold_root(std::span<double> breakpoints, double mass) {
  if (breakpoints.empty()) throw InvalidArgument("threshold_root needs at least one breakpoint");
  std::sort(breakpoints.begin(), breakpoints.end());
  const std::size_t m = breakpoints.size();
  double sum = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    sum += breakpoints[k];
    const double t = (mass + sum) / static_cast<double>(k + 1);
    if (k + 1 == m || t <= breakpoints[k + 1]) return t;
  }
  return std::numeric_limits<double>::quiet_NaN();  // unreachable
}

namespace {

Matrix plan_from_potentials(const Matrix& c, const Vector& u, const Vector& v, double eps) {
  const Eigen::Index n = c.rows();
  Matrix p(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      p(i, j) = (i == j) ? 0.0 : std::max(u(i) + v(j) - c(i, j), 0.0) / eps;
  return p;
}

// max_i |sum_{j != i} [u_i + v_j - C_ij]_+ / eps - 1|, using `c` row by row.
double row_violation(const Matrix& c, const Vector& u, const Vector& v, double eps) {
  const Eigen::Index n = c.rows();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double* row = c.data() + i * n;
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) s += std::max(u(i) + v(j) - row[j], 0.0);
    worst = std::max(worst, std::abs(s / eps - 1.0));
  }
  return worst;
}

// u_i <- root of sum_{j != i} [u_i + v_j - C_ij]_+ = eps, for every i.
void update_rows(const Matrix& c, Vector& u, const Vector& v, double eps,
                 std::vector<double>& buf) {
  const Eigen::Index n = c.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double* row = c.data() + i * n;
    std::size_t m = 0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) buf[m++] = row[j] - v(j);
    u(i) = threshold_root(std::span<double>(buf.data(), m), eps);
  }
}

}  // namespace

TransportPlan solve_quadratic(const CostMatrix& cost, const SolverConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = cost.size();
  if (n < 2) throw InvalidArgument("solve_quadratic needs n >= 2");
  if (cost.entries.cols() != n) throw InvalidArgument("cost matrix must be square");
  const Matrix& c = cost.entries;
  const double eps = cfg.epsilon;
  const bool symmetric = cfg.symmetric_mode && cost.is_symmetric(0.0);

  // Start from the potentials that are exact for a constant off-diagonal cost.
  Vector u(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double off = c.row(i).sum() - c(i, i);
    u(i) = 0.5 * (off / static_cast<double>(n - 1) + eps / static_cast<double>(n - 1));
  }
  Vector v = u;

  std::vector<double> buf(static_cast<std::size_t>(n));
  Matrix ct;
  if (!symmetric) ct = c.transpose();

  int it = 0;
  double viol = std::numeric_limits<double>::infinity();
  while (it < cfg.max_iter) {
    ++it;
    if (symmetric) {
      // Gauss-Seidel: each u_i sees the freshest values of the others.
      for (Eigen::Index i = 0; i < n; ++i) {
        const double* row = c.data() + i * n;
        std::size_t m = 0;
        for (Eigen::Index j = 0; j < n; ++j)
          if (j != i) buf[m++] = row[j] - u(j);
        u(i) = threshold_root(std::span<double>(buf.data(), m), eps);
      }
      viol = row_violation(c, u, u, eps);
    } else {
      update_rows(c, u, v, eps, buf);
      update_rows(ct, v, u, eps, buf);  // columns are now exact
      viol = row_violation(c, u, v, eps);
    }
    if (viol <= cfg.tol) break;
  }
  if (symmetric) v = u;

  TransportPlan plan;
  plan.matrix = plan_from_potentials(c, u, v, eps);
  plan.potentials = std::make_pair(u, v);
  plan.regulariser = Regulariser::quadratic;
  plan.epsilon = eps;
  plan.diagnostics.iterations = it;
  plan.diagnostics.marginal_violation = marginal_violation(plan.matrix);
  plan.diagnostics.zero_offdiag = count_zero_offdiag(plan.matrix);
  plan.diagnostics.tol = cfg.tol;
  plan.diagnostics.converged = plan.diagnostics.marginal_violation <= cfg.tol;
  return plan;
}

TransportPlan project_hollow_bistochastic(const Matrix& m, double tol, int max_iter) {
  if (m.rows() != m.cols()) throw InvalidArgument("projection input must be square");
  SolverConfig cfg;
  cfg.epsilon = 1.0;
  cfg.tol = tol;
  cfg.max_iter = max_iter;
  return solve_quadratic(cost_from_matrix(-m), cfg);
}

double quadratic_objective(const CostMatrix& c, const Matrix& plan, double epsilon) {
  double obj = 0.0;
  const Eigen::Index n = plan.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) obj += c.entries(i, j) * plan(i, j) + 0.5 * epsilon * plan(i, j) * plan(i, j);
  return obj;
}

}  // namespace selfot
