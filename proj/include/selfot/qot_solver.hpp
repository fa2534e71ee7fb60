#pragma once

#include <span>

#include "selfot/transport_core.hpp"
#include "selfot/types.hpp"

namespace selfot {

struct SolverConfig {
  double epsilon = 1.0;
  double tol = 1e-8;        // max marginal violation at termination
  int max_iter = 10000;     // full sweeps
  bool symmetric_mode = true;  // only honoured when the cost is symmetric

  void validate() const;
};

// Returns t such that sum_j max(t - breakpoints[j], 0) == mass (mass > 0).
// The left-hand side is strictly increasing once positive, so the root is unique.
// Reorders `breakpoints`.
double threshold_root(std::span<double> breakpoints, double mass);

// Quadratically regularised hollow self-transport
//   min <pi, C> + (eps/2) |pi|_F^2  over hollow bistochastic pi
// by cyclic exact coordinate ascent on the dual
//   sum u + sum v - (1/(2 eps)) sum_{i != j} [u_i + v_j - C_ij]_+^2.
// The plan is pi_ij = [u_i + v_j - C_ij]_+ / eps off the diagonal. When the
// cost is symmetric and symmetric_mode is set, v = u throughout.
// Non-convergence is reported through diagnostics.converged, not thrown.
TransportPlan solve_quadratic(const CostMatrix& c, const SolverConfig& cfg);

// Frobenius projection of m onto the hollow bistochastic set, computed as
// solve_quadratic(-m, eps = 1).
TransportPlan project_hollow_bistochastic(const Matrix& m, double tol = 1e-8,
                                          int max_iter = 10000);

// Independent small-n solver for the same problem. For n <= 4 every support
// pattern of the off-diagonal entries is enumerated, the equality-constrained
// least-squares system is solved on each, and the cheapest primal-feasible
// candidate is kept. For 5 <= n <= 8 a primal active-set method walks the
// same support patterns. n > 8 is rejected.
TransportPlan qp_oracle(const CostMatrix& c, double epsilon);

enum class OracleMethod { automatic, enumerate, active_set };
TransportPlan qp_oracle(const CostMatrix& c, double epsilon, OracleMethod method);

// <pi, C> + (eps/2) |pi|_F^2, the diagonal of C ignored.
double quadratic_objective(const CostMatrix& c, const Matrix& plan, double epsilon);

}  // namespace selfot
