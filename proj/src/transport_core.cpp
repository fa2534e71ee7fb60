#include "selfot/transport_core.hpp"

#include <algorithm>
#include <cmath>

namespace selfot {

bool CostMatrix::is_symmetric(double tol) const {
  if (entries.rows() != entries.cols()) return false;
  return (entries - entries.transpose()).cwiseAbs().maxCoeff() <= tol;
}

CostMatrix cost_matrix(const Matrix& points) {
  const Eigen::Index n = points.rows();
  if (n < 2) throw InvalidArgument("cost matrix needs at least two points");
  CostMatrix c;
  c.origin = CostOrigin::points;
  c.entries = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = 0.5 * (points.row(i) - points.row(j)).squaredNorm();
      c.entries(i, j) = v;
      c.entries(j, i) = v;
    }
  }
  return c;
}

CostMatrix cost_from_matrix(Matrix entries) {
  if (entries.rows() != entries.cols()) throw InvalidArgument("cost matrix must be square");
  if (entries.rows() < 2) throw InvalidArgument("cost matrix must be at least 2 x 2");
  if (!entries.allFinite()) throw InvalidArgument("cost matrix entries must be finite");
  return CostMatrix{std::move(entries), CostOrigin::loaded};
}

CostMatrix shift_cost(const CostMatrix& c, const Vector& a, const Vector& b, const Vector& diag) {
  const Eigen::Index n = c.size();
  if (a.size() != n || b.size() != n || diag.size() != n)
    throw InvalidArgument("shift vectors must have length n");
  CostMatrix out;
  out.origin = CostOrigin::loaded;
  out.entries = c.entries;
  out.entries.colwise() += a;
  out.entries.rowwise() += b.transpose();
  out.entries.diagonal() += diag;
  return out;
}

FeasibilityReport feasibility_report(const Matrix& plan) {
  FeasibilityReport r;
  if (plan.size() == 0) return r;
  r.max_row_violation = (plan.rowwise().sum().array() - 1.0).abs().maxCoeff();
  r.max_col_violation = (plan.colwise().sum().array() - 1.0).abs().maxCoeff();
  r.min_entry = plan.minCoeff();
  r.max_abs_diagonal = plan.diagonal().cwiseAbs().maxCoeff();
  return r;
}

double marginal_violation(const Matrix& plan) {
  const auto r = feasibility_report(plan);
  return std::max(r.max_row_violation, r.max_col_violation);
}

std::size_t count_zero_offdiag(const Matrix& plan) {
  std::size_t zeros = 0;
  for (Eigen::Index i = 0; i < plan.rows(); ++i)
    for (Eigen::Index j = 0; j < plan.cols(); ++j)
      if (i != j && plan(i, j) == 0.0) ++zeros;
  return zeros;
}

}  // namespace selfot
