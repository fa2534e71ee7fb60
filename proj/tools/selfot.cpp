// Command-line front end: sample, solve, cluster, validate.

#include <iostream>

#include "CLI11.hpp"
#include "selfot/cli.hpp"

int main(int argc, char** argv) {
  using namespace selfot::cli;
  CLI::App app{"Regularised hollow self-transport for Gaussian mixtures"};
  app.require_subcommand(1);

  SampleOptions sample;
  std::string spec_file;
  auto* s = app.add_subcommand("sample", "Draw a Gaussian mixture sample");
  s->add_option("--spec", spec_file, "JSON mixture spec {theta, means, sigma2, aniso?}");
  s->add_option("--k", sample.k, "Number of components");
  s->add_option("--theta", sample.theta, "Weights, comma separated");
  s->add_option("--means", sample.means, "Means: components separated by ';', coordinates by ','");
  s->add_option("--sigma2", sample.sigma2, "Isotropic variance");
  s->add_option("--d", sample.d, "Dimension (checked against the means)");
  s->add_option("--n", sample.n, "Number of points")->required();
  s->add_option("--seed", sample.seed, "Random seed");
  s->add_option("--out-dir", sample.out_dir, "Output directory");

  SolveOptions solve;
  std::string input, cost;
  auto* v = app.add_subcommand("solve", "Solve regularised hollow self-transport");
  auto* in_opt = v->add_option("--input", input, "Points CSV (cost built as 0.5 |Yi - Yj|^2)");
  auto* cost_opt = v->add_option("--cost", cost, "Cost matrix CSV");
  in_opt->excludes(cost_opt);
  v->add_option("--reg", solve.reg, "quadratic | entropic")
      ->check(CLI::IsMember({"quadratic", "entropic"}));
  auto* eps_opt = v->add_option("--epsilon", solve.epsilon, "Regularisation parameter");
  auto* auto_opt = v->add_flag("--epsilon-auto", solve.epsilon_auto,
                               "epsilon = n sigma2 H(theta) / K (quadratic only)");
  eps_opt->excludes(auto_opt);
  v->add_option("--sigma2", solve.sigma2, "Variance for --epsilon-auto");
  v->add_option("--theta", solve.theta, "Weights for --epsilon-auto");
  v->add_option("--k", solve.k, "Components for --epsilon-auto");
  v->add_option("--tol", solve.tol, "Max marginal violation");
  v->add_option("--max-iter", solve.max_iter, "Max sweeps");
  v->add_option("--out", solve.out, "Plan CSV path (potentials and manifest go alongside)");

  ClusterOptions cluster;
  auto* c = app.add_subcommand("cluster", "Spectral clustering of a transport plan");
  c->add_option("--plan", cluster.plan, "Plan CSV")->required();
  c->add_option("--points", cluster.points, "Points CSV")->required();
  c->add_option("--k", cluster.k, "Number of clusters or 'auto'");
  c->add_option("--seed", cluster.seed, "k-means seed");
  c->add_option("--out-dir", cluster.out_dir, "Output directory");

  ValidateOptions validate;
  auto* val = app.add_subcommand("validate", "Run validation suites");
  val->add_option("--suite", validate.suite, "prop1 | prop3 | thm2 | frobenius | compare | all");
  val->add_option("--seed", validate.seed, "Root seed");
  val->add_option("--out", validate.out, "JSON-lines report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  if (*s) {
    if (!spec_file.empty()) sample.spec_file = spec_file;
    return cmd_sample(sample, std::cout, std::cerr);
  }
  if (*v) {
    if (!input.empty()) solve.input = input;
    if (!cost.empty()) solve.cost = cost;
    return cmd_solve(solve, std::cout, std::cerr);
  }
  if (*c) return cmd_cluster(cluster, std::cout, std::cerr);
  return cmd_validate(validate, std::cout, std::cerr);
}
