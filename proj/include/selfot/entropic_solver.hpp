#pragma once

#include "selfot/qot_solver.hpp"
#include "selfot/transport_core.hpp"

namespace selfot {

// Scaling form of the entropic plan: pi = diag(r) kernel diag(s), kernel
// hollow with exp(-C_ij / eps) off the diagonal.
struct EntropicState {
  Vector row_scaling;
  Vector col_scaling;
  Matrix kernel;
};

EntropicState make_entropic_state(const CostMatrix& c, double epsilon);

// Sinkhorn scaling on the hollow kernel. Switches to log-domain updates when
// epsilon < max|C_ij| / 500. Potentials are f = eps log r, g = eps log s.
// Throws NumericalError when a kernel row underflows entirely in the plain
// domain.
TransportPlan solve_entropic(const CostMatrix& c, const SolverConfig& cfg);

// -sum pi_ij log pi_ij with 0 log 0 = 0.
double entropy_of_plan(const Matrix& plan);
inline double entropy_of_plan(const TransportPlan& plan) { return entropy_of_plan(plan.matrix); }

}  // namespace selfot
