#include "selfot/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "selfot/clustering.hpp"
#include "selfot/entropic_solver.hpp"
#include "selfot/io.hpp"
#include "selfot/mixture_model.hpp"
#include "selfot/qot_solver.hpp"
#include "selfot/suites.hpp"
#include "selfot/transport_core.hpp"

namespace selfot::cli {

namespace {

using nlohmann::json;

fs::path dir_of(const fs::path& file) {
  return file.has_parent_path() ? file.parent_path() : fs::path(".");
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

MixtureSpec spec_from_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open spec file: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("spec file is not valid JSON: ") + e.what());
  }
  MixtureSpec s;
  try {
    s.theta = j.at("theta").get<std::vector<double>>();
    for (const auto& m : j.at("means")) s.means.push_back(to_vector(m.get<std::vector<double>>()));
    s.sigma2 = j.at("sigma2").get<double>();
    if (j.contains("aniso") && !j.at("aniso").is_null()) {
      std::vector<Matrix> mats;
      for (const auto& m : j.at("aniso")) {
        const auto rows = m.get<std::vector<std::vector<double>>>();
        Matrix mat(static_cast<Eigen::Index>(rows.size()),
                   rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
          if (static_cast<Eigen::Index>(rows[r].size()) != mat.cols())
            throw InvalidArgument("aniso matrices must be rectangular");
          for (std::size_t c = 0; c < rows[r].size(); ++c)
            mat(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
        mats.push_back(std::move(mat));
      }
      s.aniso = std::move(mats);
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("spec file is missing a field: ") + e.what());
  }
  return s;
}

MixtureSpec spec_from_flags(const SampleOptions& o) {
  if (!o.k || !o.theta || !o.means || !o.sigma2)
    throw InvalidArgument("inline spec needs --k, --theta, --means and --sigma2 (or use --spec)");
  MixtureSpec s;
  s.theta = io::parse_real_list(*o.theta);
  for (const auto& g : io::parse_real_groups(*o.means)) s.means.push_back(to_vector(g));
  s.sigma2 = *o.sigma2;
  if (static_cast<int>(s.theta.size()) != *o.k)
    throw InvalidArgument("--theta must have --k entries");
  if (static_cast<int>(s.means.size()) != *o.k)
    throw InvalidArgument("--means must have --k components");
  return s;
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }
}

json diagnostics_json(const SolverDiagnostics& d) {
  return json{{"iterations", d.iterations},         {"marginal_violation", d.marginal_violation},
              {"zero_offdiag", d.zero_offdiag},     {"tol", d.tol},
              {"converged", d.converged},           {"log_domain", d.log_domain}};
}

}  // namespace

int cmd_sample(const SampleOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    MixtureSpec spec = o.spec_file ? spec_from_json(*o.spec_file) : spec_from_flags(o);
    spec.validate();
    if (o.d && *o.d != spec.dim())
      throw InvalidArgument("--d does not match the dimension of the means");
    if (o.n < 2) throw InvalidArgument("--n must be at least 2");

    const Sample s = sample_mixture(spec, o.n, o.seed);
    const fs::path points = o.out_dir / "points.csv";
    const fs::path labels = o.out_dir / "labels.csv";
    io::write_matrix_csv(points, s.points);
    io::write_labels_csv(labels, s.labels());

    io::RunManifest m("sample");
    m.set_seed(static_cast<long long>(o.seed));
    m.param("n", o.n);
    m.param("d", spec.dim());
    m.param("K", spec.K());
    m.param("sigma2", spec.sigma2);
    m.param("theta", spec.theta);
    if (o.spec_file) m.param("spec", o.spec_file->string());
    if (o.means) m.param("means", *o.means);
    m.add_artifact(points);
    m.add_artifact(labels);
    if (s.noise) {
      const fs::path noise = o.out_dir / "noise.csv";
      io::write_matrix_csv(noise, *s.noise);
      m.add_artifact(noise);
    }
    json counts = json::array();
    for (Eigen::Index k = 0; k < s.counts.size(); ++k) counts.push_back(s.counts(k));
    m.extra("counts", counts);
    m.write(o.out_dir);

    out << "n=" << s.n() << " d=" << s.dim() << " K=" << s.K() << " counts=";
    for (Eigen::Index k = 0; k < s.counts.size(); ++k) out << (k ? "," : "") << s.counts(k);
    out << "\n";
    return static_cast<int>(kSuccess);
  });
}

int cmd_solve(const SolveOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (o.input.has_value() == o.cost.has_value())
      throw InvalidArgument("give exactly one of --input (points) or --cost");
    if (o.reg != "quadratic" && o.reg != "entropic")
      throw InvalidArgument("--reg must be quadratic or entropic");
    if (o.epsilon.has_value() == o.epsilon_auto)
      throw InvalidArgument("give exactly one of --epsilon or --epsilon-auto");
    if (o.epsilon_auto && o.reg == "entropic")
      throw InvalidArgument(
          "--epsilon-auto has no known rule for the entropic regulariser; pass --epsilon");

    const CostMatrix c = o.input ? cost_matrix(io::read_matrix_csv(*o.input))
                                 : cost_from_matrix(io::read_matrix_csv(*o.cost));
    SolverConfig cfg;
    cfg.tol = o.tol;
    cfg.max_iter = o.max_iter;
    io::RunManifest m("solve");
    if (o.epsilon_auto) {
      if (!o.sigma2 || !o.theta || !o.k)
        throw InvalidArgument("--epsilon-auto needs --sigma2, --theta and --k");
      const EpsilonChoice e =
          epsilon_star(static_cast<long>(c.size()), *o.sigma2, io::parse_real_list(*o.theta), *o.k);
      if (e.degenerate) throw InvalidArgument("H(theta) = 0 gives epsilon = 0, which no solver accepts");
      cfg.epsilon = e.value;
      m.param("sigma2", *o.sigma2);
      m.param("theta", *o.theta);
      m.param("k", *o.k);
      m.extra("epsilon_choice", json{{"value", e.value}, {"entropy_theta", e.entropy_theta},
                                     {"n", e.n}, {"sigma2", e.sigma2}, {"K", e.K}});
    } else {
      cfg.epsilon = *o.epsilon;
    }
    const TransportPlan plan = o.reg == "quadratic" ? solve_quadratic(c, cfg) : solve_entropic(c, cfg);

    const fs::path dir = dir_of(o.out);
    const fs::path potentials = dir / "potentials.csv";
    io::write_matrix_csv(o.out, plan.matrix);
    io::write_potentials_csv(potentials, plan.potentials->first, plan.potentials->second);

    if (o.input) m.param("input", o.input->string());
    if (o.cost) m.param("cost", o.cost->string());
    m.param("reg", o.reg);
    m.param("epsilon", cfg.epsilon);
    m.param("epsilon_auto", o.epsilon_auto);
    m.param("tol", o.tol);
    m.param("max_iter", o.max_iter);
    m.param("out", o.out.string());
    m.add_artifact(o.out);
    m.add_artifact(potentials);
    m.extra("diagnostics", diagnostics_json(plan.diagnostics));
    m.write(dir);

    out << "n=" << c.size() << " reg=" << o.reg << " epsilon=" << io::format_real(cfg.epsilon)
        << " iterations=" << plan.diagnostics.iterations
        << " violation=" << plan.diagnostics.marginal_violation
        << " zeros=" << plan.diagnostics.zero_offdiag
        << (plan.diagnostics.converged ? " converged" : " NOT CONVERGED") << "\n";
    return static_cast<int>(plan.diagnostics.converged ? kSuccess : kNotConverged);
  });
}

int cmd_cluster(const ClusterOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Matrix plan = io::read_matrix_csv(o.plan);
    const Matrix points = io::read_matrix_csv(o.points);
    if (plan.rows() != plan.cols()) throw InvalidArgument("plan must be square");
    if (plan.rows() != points.rows()) throw InvalidArgument("plan and points have different n");
    const FeasibilityReport fr = feasibility_report(plan);
    if (!fr.feasible(1e-4)) {
      std::ostringstream os;
      os << "plan is not hollow bistochastic at tolerance 1e-4 (row violation "
         << fr.max_row_violation << ", column violation " << fr.max_col_violation
         << ", min entry " << fr.min_entry << ", max |diagonal| " << fr.max_abs_diagonal << ")";
      throw InvalidArgument(os.str());
    }
    std::optional<int> K;
    if (o.k != "auto") {
      std::size_t used = 0;
      int v = 0;
      try {
        v = std::stoi(o.k, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != o.k.size() || v < 1) throw InvalidArgument("--k must be a positive integer or 'auto'");
      K = v;
    }
    const ClusteringResult r = cluster_plan(plan, points, K, o.seed);

    const fs::path assignments = o.out_dir / "assignments.csv";
    const fs::path estimates = o.out_dir / "estimates.csv";
    io::write_labels_csv(assignments, r.labels);
    {
      std::ofstream e(estimates, std::ios::binary | std::ios::trunc);
      if (!e) throw std::runtime_error("cannot open for writing: " + estimates.string());
      e << "K_hat," << r.K_hat << '\n';
      e << "sigma2_hat," << io::format_real(r.sigma2_hat) << '\n';
      e << "epsilon_implied," << io::format_real(r.epsilon_implied) << '\n';
      e << "theta_hat";
      for (double t : r.theta_hat) e << ',' << io::format_real(t);
      e << '\n';
      for (std::size_t k = 0; k < r.means_hat.size(); ++k) {
        e << "mean_" << k;
        for (Eigen::Index c = 0; c < r.means_hat[k].size(); ++c)
          e << ',' << io::format_real(r.means_hat[k](c));
        e << '\n';
      }
    }

    io::RunManifest m("cluster");
    m.set_seed(static_cast<long long>(o.seed));
    m.param("plan", o.plan.string());
    m.param("points", o.points.string());
    m.param("k", o.k);
    m.add_artifact(assignments);
    m.add_artifact(estimates);
    m.extra("K_hat", r.K_hat);
    m.write(o.out_dir);

    out << "K_hat=" << r.K_hat << " sigma2_hat=" << io::format_real(r.sigma2_hat)
        << " epsilon_implied=" << io::format_real(r.epsilon_implied) << "\n";
    return static_cast<int>(kSuccess);
  });
}

int cmd_validate(const ValidateOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!is_known_suite(o.suite)) throw InvalidArgument("unknown suite: " + o.suite);
    const auto records = run_suite(o.suite, o.seed);
    if (o.out.has_parent_path()) fs::create_directories(o.out.parent_path());
    std::size_t passed = 0;
    {
      std::ofstream f(o.out, std::ios::binary | std::ios::trunc);
      if (!f) throw std::runtime_error("cannot open for writing: " + o.out.string());
      for (const auto& r : records) {
        f << r.dump() << '\n';
        if (record_passed(r)) ++passed;
      }
    }
    io::RunManifest m("validate");
    m.set_seed(static_cast<long long>(o.seed));
    m.param("suite", o.suite);
    m.param("out", o.out.string());
    m.add_artifact(o.out);
    m.extra("records", records.size());
    m.extra("passed", passed);
    m.write(dir_of(o.out));

    for (const auto& r : records)
      if (!record_passed(r)) out << "FAIL " << r.at("suite").get<std::string>() << "/" << r.at("check").get<std::string>() << " statistic=" << r.at("statistic") << "\n";
    out << passed << "/" << records.size() << " checks passed\n";
    return static_cast<int>(passed == records.size() ? kSuccess : kValidationFailed);
  });
}

}  // namespace selfot::cli
