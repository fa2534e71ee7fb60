#pragma once

#include <cstddef>

#include "selfot/types.hpp"

namespace selfot {

enum class CostOrigin { points, loaded };

// Symmetric nonnegative hollow when built from points; a loaded or shifted
// cost carries no such guarantee.
struct CostMatrix {
  Matrix entries;
  CostOrigin origin = CostOrigin::points;

  Eigen::Index size() const { return entries.rows(); }
  bool is_symmetric(double tol = 1e-10) const;
};

// C_ij = 0.5 * |Y_i - Y_j|^2, one evaluation per unordered pair.
CostMatrix cost_matrix(const Matrix& points);

// Wraps an arbitrary square matrix; no sign or diagonal invariants are enforced.
CostMatrix cost_from_matrix(Matrix entries);

// C + a 1^T + 1 b^T + Diag(diag).
CostMatrix shift_cost(const CostMatrix& c, const Vector& a, const Vector& b, const Vector& diag);

struct FeasibilityReport {
  double max_row_violation = 0.0;
  double max_col_violation = 0.0;
  double min_entry = 0.0;
  double max_abs_diagonal = 0.0;

  // Membership in the hollow bistochastic set at the given tolerance.
  bool feasible(double tol) const {
    return max_row_violation <= tol && max_col_violation <= tol && min_entry >= -tol &&
           max_abs_diagonal <= tol;
  }
};

FeasibilityReport feasibility_report(const Matrix& plan);
inline FeasibilityReport feasibility_report(const TransportPlan& plan) {
  return feasibility_report(plan.matrix);
}

// max over rows and columns of |sum - 1|.
double marginal_violation(const Matrix& plan);
std::size_t count_zero_offdiag(const Matrix& plan);

// <A, B> = sum_ij A_ij B_ij
inline double frobenius_inner(const Matrix& a, const Matrix& b) { return a.cwiseProduct(b).sum(); }

}  // namespace selfot
