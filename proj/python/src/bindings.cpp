#include <optional>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "selfot/clustering.hpp"
#include "selfot/entropic_solver.hpp"
#include "selfot/mixture_model.hpp"
#include "selfot/qot_solver.hpp"
#include "selfot/transport_core.hpp"

namespace py = pybind11;
using namespace selfot;

namespace {

SolverConfig make_config(double epsilon, double tol, int max_iter, bool symmetric) {
  SolverConfig cfg;
  cfg.epsilon = epsilon;
  cfg.tol = tol;
  cfg.max_iter = max_iter;
  cfg.symmetric_mode = symmetric;
  return cfg;
}

std::vector<Vector> rows_of(const Matrix& m) {
  std::vector<Vector> out;
  for (Eigen::Index k = 0; k < m.rows(); ++k) out.push_back(m.row(k).transpose());
  return out;
}

Matrix stack(const std::vector<Vector>& rows) {
  Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t k = 0; k < rows.size(); ++k) m.row(k) = rows[k].transpose();
  return m;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Self-transport clustering of Gaussian mixtures";

  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

  py::enum_<Regulariser>(m, "Regulariser")
      .value("quadratic", Regulariser::quadratic)
      .value("entropic", Regulariser::entropic)
      .value("oracle", Regulariser::oracle);

  py::class_<SolverDiagnostics>(m, "SolverDiagnostics")
      .def_readonly("iterations", &SolverDiagnostics::iterations)
      .def_readonly("marginal_violation", &SolverDiagnostics::marginal_violation)
      .def_readonly("zero_offdiag", &SolverDiagnostics::zero_offdiag)
      .def_readonly("tol", &SolverDiagnostics::tol)
      .def_readonly("converged", &SolverDiagnostics::converged)
      .def_readonly("log_domain", &SolverDiagnostics::log_domain);

  py::class_<TransportPlan>(m, "TransportPlan")
      .def_readonly("matrix", &TransportPlan::matrix)
      .def_readonly("potentials", &TransportPlan::potentials)
      .def_readonly("regulariser", &TransportPlan::regulariser)
      .def_readonly("epsilon", &TransportPlan::epsilon)
      .def_readonly("diagnostics", &TransportPlan::diagnostics)
      .def("__repr__", [](const TransportPlan& p) {
        return "<TransportPlan n=" + std::to_string(p.size()) + " " + to_string(p.regulariser) + ">";
      });

  py::class_<Sample>(m, "Sample")
      .def_readonly("points", &Sample::points)
      .def_readonly("memberships", &Sample::memberships)
      .def_readonly("counts", &Sample::counts)
      .def_readonly("noise", &Sample::noise)
      .def_property_readonly("labels", &Sample::labels)
      .def("clean_points", &Sample::clean_points);

  m.def(
      "sample_mixture",
      [](std::vector<double> theta, const Matrix& means, double sigma2, long n, std::uint64_t seed,
         std::optional<std::vector<Matrix>> aniso) {
        MixtureSpec spec;
        spec.theta = std::move(theta);
        spec.means = rows_of(means);
        spec.sigma2 = sigma2;
        spec.aniso = std::move(aniso);
        return sample_mixture(spec, n, seed);
      },
      py::arg("theta"), py::arg("means"), py::arg("sigma2"), py::arg("n"), py::arg("seed"),
      py::arg("aniso") = py::none());

  m.def("cost_matrix", [](const Matrix& points) { return cost_matrix(points).entries; },
        py::arg("points"));

  m.def("oracle_plan", [](const IntVector& labels, int K) {
        return oracle_plan(memberships_from_labels(labels, K));
      }, py::arg("labels"), py::arg("K"));

  m.def("epsilon_star", [](long n, double sigma2, const std::vector<double>& theta) {
        return epsilon_star(n, sigma2, theta, static_cast<int>(theta.size())).value;
      }, py::arg("n"), py::arg("sigma2"), py::arg("theta"));

  m.def("solve_quadratic",
        [](const Matrix& cost, double epsilon, double tol, int max_iter, bool symmetric) {
          py::gil_scoped_release nogil;
          return solve_quadratic(cost_from_matrix(cost), make_config(epsilon, tol, max_iter, symmetric));
        },
        py::arg("cost"), py::arg("epsilon"), py::arg("tol") = 1e-8, py::arg("max_iter") = 10000,
        py::arg("symmetric") = true);

  m.def("solve_entropic",
        [](const Matrix& cost, double epsilon, double tol, int max_iter) {
          py::gil_scoped_release nogil;
          return solve_entropic(cost_from_matrix(cost), make_config(epsilon, tol, max_iter, true));
        },
        py::arg("cost"), py::arg("epsilon"), py::arg("tol") = 1e-8, py::arg("max_iter") = 10000);

  m.def("project_hollow_bistochastic", &project_hollow_bistochastic, py::arg("m"),
        py::arg("tol") = 1e-8, py::arg("max_iter") = 10000);

  m.def("qp_oracle", [](const Matrix& cost, double epsilon) {
        return qp_oracle(cost_from_matrix(cost), epsilon);
      }, py::arg("cost"), py::arg("epsilon"));

  m.def("is_feasible", [](const Matrix& plan, double tol) {
        return feasibility_report(plan).feasible(tol);
      }, py::arg("plan"), py::arg("tol") = 1e-8);

  m.def("marginal_violation", &marginal_violation, py::arg("plan"));

  m.def("estimate_K", [](const Matrix& plan) {
        const SpectrumEstimate s = estimate_K(plan);
        return py::make_tuple(s.K_hat, s.spectrum);
      }, py::arg("plan"));

  m.def("spectral_cluster", py::overload_cast<const Matrix&, int, std::uint64_t>(&spectral_cluster),
        py::arg("plan"), py::arg("K"), py::arg("seed") = 0);

  m.def("cluster_plan",
        [](const Matrix& plan, const Matrix& points, std::optional<int> K, std::uint64_t seed) {
          const ClusteringResult r = cluster_plan(plan, points, K, seed);
          return py::dict(py::arg("labels") = r.labels, py::arg("K") = r.K_hat,
                          py::arg("theta") = r.theta_hat, py::arg("means") = stack(r.means_hat),
                          py::arg("sigma2") = r.sigma2_hat,
                          py::arg("epsilon_implied") = r.epsilon_implied,
                          py::arg("spectrum") = r.spectrum);
        },
        py::arg("plan"), py::arg("points"), py::arg("K") = py::none(), py::arg("seed") = 0);

  m.def("matched_accuracy", &matched_accuracy, py::arg("labels"), py::arg("truth"));

  m.attr("__version__") = "0.1.0";
}
