#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "selfot/qot_solver.hpp"

namespace selfot {

namespace {

struct Entry {
  Eigen::Index i;
  Eigen::Index j;
};

std::vector<Entry> offdiag_entries(Eigen::Index n) {
  std::vector<Entry> out;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) out.push_back({i, j});
  return out;
}

struct SupportSolution {
  Vector u, v;
  Vector x;  // value on every off-diagonal entry (zero outside the support)
  bool consistent = false;
};

// Minimises <C, x> + (eps/2)|x|^2 subject to unit row and column sums with x
// vanishing outside `support` (no sign constraint). Stationarity gives
// x_ij = (u_i + v_j - C_ij)/eps on the support; substituting into the
// marginal constraints yields a 2n x 2n linear system for (u, v) that is
// rank deficient by at least one, so it is solved in the least-squares sense.
SupportSolution solve_on_support(const Matrix& c, double eps, const std::vector<Entry>& entries,
                                 const std::vector<char>& support) {
  const Eigen::Index n = c.rows();
  Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Constant(2 * n, eps);
  for (std::size_t e = 0; e < entries.size(); ++e) {
    if (!support[e]) continue;
    const auto [i, j] = entries[e];
    // row i:   sum_j (u_i + v_j) = eps + sum_j C_ij
    sys(i, i) += 1.0;
    sys(i, n + j) += 1.0;
    rhs(i) += c(i, j);
    // column j
    sys(n + j, n + j) += 1.0;
    sys(n + j, i) += 1.0;
    rhs(n + j) += c(i, j);
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(sys);
  const Eigen::VectorXd lam = cod.solve(rhs);

  SupportSolution s;
  s.u = lam.head(n);
  s.v = lam.tail(n);
  const double scale = 1.0 + rhs.cwiseAbs().maxCoeff();
  s.consistent = (sys * lam - rhs).cwiseAbs().maxCoeff() <= 1e-9 * scale;
  s.x = Vector::Zero(static_cast<Eigen::Index>(entries.size()));
  for (std::size_t e = 0; e < entries.size(); ++e) {
    if (!support[e]) continue;
    const auto [i, j] = entries[e];
    s.x(static_cast<Eigen::Index>(e)) = (s.u(i) + s.v(j) - c(i, j)) / eps;
  }
  return s;
}

double objective_of(const Matrix& c, double eps, const std::vector<Entry>& entries, const Vector& x) {
  double obj = 0.0;
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const double xe = x(static_cast<Eigen::Index>(e));
    obj += c(entries[e].i, entries[e].j) * xe + 0.5 * eps * xe * xe;
  }
  return obj;
}

TransportPlan assemble(Eigen::Index n, const std::vector<Entry>& entries, const Vector& x,
                       Vector u, Vector v, double eps, int iterations) {
  TransportPlan plan;
  plan.matrix = Matrix::Zero(n, n);
  for (std::size_t e = 0; e < entries.size(); ++e)
    plan.matrix(entries[e].i, entries[e].j) = std::max(x(static_cast<Eigen::Index>(e)), 0.0);
  plan.potentials = std::make_pair(std::move(u), std::move(v));
  plan.regulariser = Regulariser::quadratic;
  plan.epsilon = eps;
  plan.diagnostics.iterations = iterations;
  plan.diagnostics.marginal_violation = marginal_violation(plan.matrix);
  plan.diagnostics.zero_offdiag = count_zero_offdiag(plan.matrix);
  plan.diagnostics.tol = 1e-9;
  plan.diagnostics.converged = true;
  return plan;
}

TransportPlan enumerate_supports(const Matrix& c, double eps) {
  const Eigen::Index n = c.rows();
  const auto entries = offdiag_entries(n);
  const std::size_t m = entries.size();
  const std::uint64_t patterns = std::uint64_t{1} << m;

  double best = std::numeric_limits<double>::infinity();
  SupportSolution best_sol;
  std::vector<char> support(m);
  int evaluated = 0;
  for (std::uint64_t mask = 1; mask < patterns; ++mask) {
    std::vector<int> row_hits(n, 0), col_hits(n, 0);
    for (std::size_t e = 0; e < m; ++e) {
      support[e] = static_cast<char>((mask >> e) & 1U);
      if (support[e]) {
        ++row_hits[entries[e].i];
        ++col_hits[entries[e].j];
      }
    }
    if (std::find(row_hits.begin(), row_hits.end(), 0) != row_hits.end()) continue;
    if (std::find(col_hits.begin(), col_hits.end(), 0) != col_hits.end()) continue;

    ++evaluated;
    SupportSolution s = solve_on_support(c, eps, entries, support);
    if (!s.consistent) continue;
    if (s.x.size() > 0 && s.x.minCoeff() < -1e-12) continue;
    const double obj = objective_of(c, eps, entries, s.x);
    if (obj < best) {
      best = obj;
      best_sol = std::move(s);
    }
  }
  if (!std::isfinite(best)) throw NumericalError("qp_oracle: no feasible support found");
  return assemble(n, entries, best_sol.x, best_sol.u, best_sol.v, eps, evaluated);
}

TransportPlan active_set(const Matrix& c, double eps) {
  const Eigen::Index n = c.rows();
  const auto entries = offdiag_entries(n);
  const std::size_t m = entries.size();

  // Uniform hollow plan: strictly feasible, empty working set.
  Vector x = Vector::Constant(static_cast<Eigen::Index>(m), 1.0 / static_cast<double>(n - 1));
  std::vector<char> free_set(m, 1);

  constexpr int kMaxSteps = 100000;
  for (int step = 1; step <= kMaxSteps; ++step) {
    SupportSolution s = solve_on_support(c, eps, entries, free_set);
    const Vector p = s.x - x;
    if (p.cwiseAbs().maxCoeff() <= 1e-13 * (1.0 + x.cwiseAbs().maxCoeff())) {
      // Multipliers of the active bounds x_ij >= 0: C_ij - u_i - v_j.
      double most_negative = -1e-12;
      std::size_t release = m;
      for (std::size_t e = 0; e < m; ++e) {
        if (free_set[e]) continue;
        const double mult = c(entries[e].i, entries[e].j) - s.u(entries[e].i) - s.v(entries[e].j);
        if (mult < most_negative) {
          most_negative = mult;
          release = e;
        }
      }
      if (release == m) return assemble(n, entries, s.x, s.u, s.v, eps, step);
      free_set[release] = 1;
      continue;
    }
    double alpha = 1.0;
    std::size_t blocking = m;
    for (std::size_t e = 0; e < m; ++e) {
      const auto k = static_cast<Eigen::Index>(e);
      if (free_set[e] && p(k) < 0.0) {
        const double r = -x(k) / p(k);
        if (r < alpha) {
          alpha = r;
          blocking = e;
        }
      }
    }
    x += alpha * p;
    if (blocking != m) {
      x(static_cast<Eigen::Index>(blocking)) = 0.0;
      free_set[blocking] = 0;
    }
  }
  throw NumericalError("qp_oracle: active-set method did not terminate");
}

}  // namespace

TransportPlan qp_oracle(const CostMatrix& c, double epsilon, OracleMethod method) {
  const Eigen::Index n = c.size();
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  if (n < 2) throw InvalidArgument("qp_oracle needs n >= 2");
  if (n > 8) throw InvalidArgument("qp_oracle is limited to n <= 8");
  if (method == OracleMethod::automatic)
    method = n <= 4 ? OracleMethod::enumerate : OracleMethod::active_set;
  if (method == OracleMethod::enumerate && n > 4)
    throw InvalidArgument("support enumeration is limited to n <= 4");
  return method == OracleMethod::enumerate ? enumerate_supports(c.entries, epsilon)
                                           : active_set(c.entries, epsilon);
}

TransportPlan qp_oracle(const CostMatrix& c, double epsilon) {
  return qp_oracle(c, epsilon, OracleMethod::automatic);
}

}  // namespace selfot
