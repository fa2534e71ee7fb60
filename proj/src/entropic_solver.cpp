#include "selfot/entropic_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace selfot {

namespace {

double max_abs_offdiag(const Matrix& c) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < c.rows(); ++i)
    for (Eigen::Index j = 0; j < c.cols(); ++j)
      if (i != j) m = std::max(m, std::abs(c(i, j)));
  return m;
}

// -eps * log sum_{j != i} exp((pot_j - C_ij) / eps), for every row i of c.
void softmin_rows(const Matrix& c, const Vector& pot, double eps, Vector& out) {
  const Eigen::Index n = c.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double* row = c.data() + i * n;
    double top = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) top = std::max(top, (pot(j) - row[j]) / eps);
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) s += std::exp((pot(j) - row[j]) / eps - top);
    out(i) = -eps * (top + std::log(s));
  }
}

double log_row_violation(const Matrix& c, const Vector& f, const Vector& g, double eps) {
  const Eigen::Index n = c.rows();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) s += std::exp((f(i) + g(j) - c(i, j)) / eps);
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

TransportPlan finish(Matrix plan, Vector f, Vector g, const SolverConfig& cfg, int it, bool log_domain) {
  TransportPlan out;
  out.matrix = std::move(plan);
  out.matrix.diagonal().setZero();
  out.potentials = std::make_pair(std::move(f), std::move(g));
  out.regulariser = Regulariser::entropic;
  out.epsilon = cfg.epsilon;
  out.diagnostics.iterations = it;
  out.diagnostics.marginal_violation = marginal_violation(out.matrix);
  out.diagnostics.zero_offdiag = count_zero_offdiag(out.matrix);
  out.diagnostics.tol = cfg.tol;
  out.diagnostics.converged = out.diagnostics.marginal_violation <= cfg.tol;
  out.diagnostics.log_domain = log_domain;
  return out;
}

TransportPlan solve_log_domain(const Matrix& c, const SolverConfig& cfg) {
  const Eigen::Index n = c.rows();
  const double eps = cfg.epsilon;
  const Matrix ct = c.transpose();
  Vector f = Vector::Zero(n), g = Vector::Zero(n);
  int it = 0;
  while (it < cfg.max_iter) {
    ++it;
    softmin_rows(c, g, eps, f);
    softmin_rows(ct, f, eps, g);  // columns exact
    if (log_row_violation(c, f, g, eps) <= cfg.tol) break;
  }
  Matrix plan(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      plan(i, j) = i == j ? 0.0 : std::exp((f(i) + g(j) - c(i, j)) / eps);
  return finish(std::move(plan), std::move(f), std::move(g), cfg, it, true);
}

}  // namespace

EntropicState make_entropic_state(const CostMatrix& c, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  const Eigen::Index n = c.size();
  EntropicState st;
  st.kernel = (-c.entries.array() / epsilon).exp().matrix();
  st.kernel.diagonal().setZero();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(st.kernel.row(i).maxCoeff() >= std::numeric_limits<double>::min()) ||
        !(st.kernel.col(i).maxCoeff() >= std::numeric_limits<double>::min()))
      throw NumericalError(
          "entropic kernel underflows on a whole row/column; use a larger epsilon or the "
          "log-domain solver");
  }
  st.row_scaling = Vector::Ones(n);
  st.col_scaling = Vector::Ones(n);
  return st;
}

TransportPlan solve_entropic(const CostMatrix& cost, const SolverConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = cost.size();
  if (n < 2) throw InvalidArgument("solve_entropic needs n >= 2");
  if (cfg.epsilon < max_abs_offdiag(cost.entries) / 500.0) return solve_log_domain(cost.entries, cfg);

  EntropicState st = make_entropic_state(cost, cfg.epsilon);
  const Matrix& k = st.kernel;
  Vector& r = st.row_scaling;
  Vector& s = st.col_scaling;
  int it = 0;
  while (it < cfg.max_iter) {
    ++it;
    r = (k * s).cwiseInverse();
    s = (k.transpose() * r).cwiseInverse();
    if (!r.allFinite() || !s.allFinite())
      throw NumericalError("Sinkhorn scalings overflowed; use a larger epsilon");
    const double viol = (r.cwiseProduct(k * s).array() - 1.0).abs().maxCoeff();
    if (viol <= cfg.tol) break;
  }
  Matrix plan = r.asDiagonal() * k * s.asDiagonal();
  Vector f = cfg.epsilon * r.array().log().matrix();
  Vector g = cfg.epsilon * s.array().log().matrix();
  return finish(std::move(plan), std::move(f), std::move(g), cfg, it, false);
}

double entropy_of_plan(const Matrix& plan) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < plan.rows(); ++i)
    for (Eigen::Index j = 0; j < plan.cols(); ++j) {
      const double p = plan(i, j);
      if (p < 0.0) throw InvalidArgument("plan entries must be nonnegative");
      if (p > 0.0) h -= p * std::log(p);
    }
  return h;
}

}  // namespace selfot
