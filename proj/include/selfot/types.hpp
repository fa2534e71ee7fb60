#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace selfot {

// All matrices are dense and row-major.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using IntMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using IntVector = Eigen::VectorXi;

// Thrown when an input violates a documented precondition or invariant.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Thrown when a numerical routine cannot produce a result (e.g. kernel underflow).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Regulariser { quadratic, entropic, oracle };

inline const char* to_string(Regulariser r) {
  switch (r) {
    case Regulariser::quadratic: return "quadratic";
    case Regulariser::entropic: return "entropic";
    case Regulariser::oracle: return "oracle";
  }
  return "unknown";
}

struct SolverDiagnostics {
  int iterations = 0;
  double marginal_violation = 0.0;
  std::size_t zero_offdiag = 0;  // off-diagonal entries that are exactly zero
  double tol = 0.0;
  bool converged = true;
  bool log_domain = false;  // entropic only
};

// A hollow bistochastic plan together with the potentials that produced it.
// For the quadratic regulariser potentials are (u, v); for the entropic one (f, g).
struct TransportPlan {
  Matrix matrix;
  std::optional<std::pair<Vector, Vector>> potentials;
  Regulariser regulariser = Regulariser::oracle;
  std::optional<double> epsilon;
  SolverDiagnostics diagnostics;

  Eigen::Index size() const { return matrix.rows(); }
};

}  // namespace selfot
