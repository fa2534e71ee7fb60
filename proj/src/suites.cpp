#include "selfot/suites.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "selfot/mixture_model.hpp"
#include "selfot/parallel.hpp"
#include "selfot/qot_solver.hpp"
#include "selfot/validation.hpp"

namespace selfot {

namespace {

using nlohmann::json;

CheckRecord make_record(const std::string& suite, const std::string& check, json inputs,
                        double statistic, json threshold, const std::string& comparison, bool pass) {
  return json{{"suite", suite},         {"check", check},           {"inputs", std::move(inputs)},
              {"statistic", statistic}, {"threshold", threshold},   {"comparison", comparison},
              {"verdict", pass ? "pass" : "fail"}};
}

void frobenius_suite(std::uint64_t seed, std::vector<CheckRecord>& out) {
  constexpr int kMatrices = 100;
  std::vector<CheckRecord> recs(kMatrices);
  parallel_for(kMatrices, [&](std::size_t idx) {
    std::mt19937_64 rng(seed + idx);
    std::uniform_int_distribution<int> pick_n(10, 100), pick_k(1, 5);
    const int n = pick_n(rng);
    const int K = pick_k(rng);
    std::uniform_int_distribution<int> pick_label(0, K - 1);
    IntMatrix z;
    int redraws = -1;
    do {
      ++redraws;
      IntVector labels(n);
      for (int i = 0; i < n; ++i) labels(i) = pick_label(rng);
      z = memberships_from_labels(labels, K);
    } while ((counts_of(z).array() == 1).any());
    const FrobeniusRecord r = frobenius_identity_check(z);
    const double gap = std::abs(r.norm2 - r.identity);
    recs[idx] = make_record("frobenius", "oracle_plan_norm_identity",
                            {{"index", idx}, {"seed", seed + idx}, {"n", n}, {"K", K},
                             {"redraws", redraws}, {"norm2", r.norm2}, {"identity", r.identity},
                             {"K_plus_correction", r.K_plus_correction}},
                            gap, 1e-10, "<=", r.holds);
  });
  out.insert(out.end(), recs.begin(), recs.end());
}

void prop1_suite(std::uint64_t seed, std::vector<CheckRecord>& out) {
  Prop1Config cfg;
  cfg.spec.theta = {0.5, 0.5};
  cfg.spec.means = {Vector::Zero(1), Vector::Constant(1, 3.0)};
  cfg.spec.sigma2 = 1.0;
  cfg.seed = seed;
  const ScalingReport rep = check_prop1(cfg);
  for (const auto& c : rep.cells) {
    const double z = c.std_error > 0.0 ? std::abs(c.mean) / c.std_error : 0.0;
    out.push_back(make_record(
        "prop1", "cell_centred",
        {{"n", c.n}, {"d", c.d}, {"replications", c.replications}, {"redraws", c.redraws},
         {"median_abs_scaled", c.median_abs}, {"p90_abs_scaled", c.p90_abs},
         {"mean_scaled", c.mean}, {"std_error", c.std_error},
         {"printed_form_median_abs_scaled", c.printed_median_abs}},
        z, 3.0, "<=", z <= 3.0));
  }
  json medians = json::array();
  for (const auto& c : rep.cells) medians.push_back(c.median_abs);
  out.push_back(make_record("prop1", "scaled_median_ratio", {{"cell_medians", medians}},
                            rep.median_ratio, 3.0, "<=", rep.bounded));
}

void prop3_suite(std::uint64_t seed, std::vector<CheckRecord>& out) {
  const std::vector<int> dims{50, 200, 800};
  constexpr long kPoints = 60;
  std::vector<CheckRecord> recs(2 * dims.size());
  parallel_for(dims.size(), [&](std::size_t idx) {
    const int d = dims[idx];
    std::mt19937_64 rng(seed + idx);
    MixtureSpec spec = two_cluster_spec(d, 5.0);
    spec.aniso = std::vector<Matrix>{random_psd(d, 1.0, rng), random_psd(d, 1.0, rng)};
    const Sample s = sample_mixture(spec, kPoints, seed + idx);
    const Matrix clean = s.clean_points();
    const PerturbationDecomposition dec = decompose_perturbation(clean, *s.noise, s.points);
    const CostMatrix c_clean = cost_matrix(clean);
    const CostMatrix c_corrupt = cost_matrix(s.points);
    const double rel = reconstruction_error(dec, c_clean, c_corrupt) /
                       (1.0 + c_corrupt.entries.cwiseAbs().maxCoeff());
    recs[2 * idx] = make_record("prop3", "reconstruction", {{"d", d}, {"n", kPoints}}, rel, 1e-12,
                                "<=", rel <= 1e-12);

    double sum = 0.0, sum2 = 0.0;
    const double m = static_cast<double>(kPoints * (kPoints - 1));
    for (Eigen::Index i = 0; i < kPoints; ++i)
      for (Eigen::Index j = 0; j < kPoints; ++j)
        if (i != j) {
          sum += dec.residual_E(i, j);
          sum2 += dec.residual_E(i, j) * dec.residual_E(i, j);
        }
    const double sd = std::sqrt(std::max(0.0, sum2 / m - (sum / m) * (sum / m)));
    const double scaled = sd / std::sqrt(static_cast<double>(d));
    recs[2 * idx + 1] =
        make_record("prop3", "residual_scale", {{"d", d}, {"n", kPoints}, {"residual_sd", sd}},
                    scaled, json::array({0.2, 5.0}), "in", scaled >= 0.2 && scaled <= 5.0);
  });
  out.insert(out.end(), recs.begin(), recs.end());
}

void thm2_suite(std::uint64_t seed, std::vector<CheckRecord>& out) {
  constexpr int kInstances = 100;
  constexpr long kPoints = 100;
  constexpr int kDim = 100;
  std::vector<CheckRecord> recs(kInstances);
  std::vector<char> held(kInstances, 0);
  parallel_for(kInstances, [&](std::size_t idx) {
    std::mt19937_64 rng(seed + idx);
    MixtureSpec spec = two_cluster_spec(kDim, 3.0);
    spec.aniso = std::vector<Matrix>{random_psd(kDim, 1.0, rng), random_psd(kDim, 1.0, rng)};
    const Sample s = sample_mixture(spec, kPoints, seed + idx);
    const Matrix clean = s.clean_points();
    const PerturbationDecomposition dec = decompose_perturbation(clean, *s.noise, s.points);
    SolverConfig cfg;
    cfg.epsilon = epsilon_star(kPoints, spec.sigma2, spec.theta, spec.K()).value;
    const RobustnessRecord r =
        check_robustness_bound(cost_matrix(clean), cost_matrix(s.points), dec.residual_E, cfg);
    held[idx] = r.holds ? 1 : 0;
    recs[idx] = make_record("thm2", "robustness_bound",
                            {{"index", idx}, {"seed", seed + idx}, {"n", kPoints}, {"d", kDim},
                             {"epsilon", cfg.epsilon}, {"lhs", r.lhs}, {"rhs", r.rhs},
                             {"converged", r.converged}},
                            r.lhs - r.rhs, 10.0 * cfg.tol, "<=", r.holds);
  });
  out.insert(out.end(), recs.begin(), recs.end());
  const double frac = static_cast<double>(std::count(held.begin(), held.end(), 1)) / kInstances;
  out.push_back(make_record("thm2", "fraction_holding", {{"instances", kInstances}}, frac, 0.99,
                            ">=", frac >= 0.99));
}

void compare_suite(std::uint64_t seed, std::vector<CheckRecord>& out) {
  constexpr int kSeeds = 50;
  constexpr long kPoints = 200;
  const MixtureSpec spec = two_cluster_spec(20, 10.0);
  const double eps = epsilon_star(kPoints, spec.sigma2, spec.theta, spec.K()).value;
  std::vector<CheckRecord> recs(kSeeds);
  std::vector<ComparisonRecord> results(kSeeds);
  parallel_for(kSeeds, [&](std::size_t idx) {
    const ComparisonRecord r = regulariser_comparison(spec, kPoints, eps, eps, seed + idx);
    results[idx] = r;
    recs[idx] = make_record(
        "compare", "quadratic_closer_to_oracle",
        {{"index", idx}, {"seed", seed + idx}, {"n", kPoints}, {"epsilon", eps},
         {"quadratic_sparsity", r.quadratic_sparsity},
         {"entropic_min_offdiag", r.entropic_min_offdiag},
         {"quadratic_distance", r.quadratic_distance}, {"entropic_distance", r.entropic_distance},
         {"converged", r.converged}},
        r.quadratic_distance - r.entropic_distance, 0.0, "<=", r.holds);
  });
  out.insert(out.end(), recs.begin(), recs.end());
  int closer = 0, positive = 0;
  for (const auto& r : results) {
    if (r.quadratic_distance <= r.entropic_distance) ++closer;
    if (r.entropic_min_offdiag > 0.0) ++positive;
  }
  const double frac = static_cast<double>(closer) / kSeeds;
  out.push_back(make_record("compare", "fraction_quadratic_closer", {{"seeds", kSeeds}}, frac, 0.9,
                            ">=", frac >= 0.9));
  const double pos = static_cast<double>(positive) / kSeeds;
  out.push_back(make_record("compare", "entropic_strictly_positive", {{"seeds", kSeeds}}, pos, 1.0,
                            ">=", pos >= 1.0));
}

}  // namespace

bool is_known_suite(const std::string& name) {
  static const std::vector<std::string> names{"prop1", "prop3", "thm2", "frobenius", "compare", "all"};
  return std::find(names.begin(), names.end(), name) != names.end();
}

std::vector<CheckRecord> run_suite(const std::string& name, std::uint64_t seed) {
  if (!is_known_suite(name)) throw InvalidArgument("unknown suite: " + name);
  std::vector<CheckRecord> out;
  const bool all = name == "all";
  if (all || name == "frobenius") frobenius_suite(seed, out);
  if (all || name == "prop1") prop1_suite(seed, out);
  if (all || name == "prop3") prop3_suite(seed, out);
  if (all || name == "thm2") thm2_suite(seed, out);
  if (all || name == "compare") compare_suite(seed, out);
  return out;
}

}  // namespace selfot
