#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace selfot::cli {

namespace fs = std::filesystem;

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,
  kNotConverged = 2,
  kValidationFailed = 3,
};

struct SampleOptions {
  std::optional<fs::path> spec_file;  // JSON {theta, means, sigma2, aniso?}
  std::optional<int> k;
  std::optional<std::string> theta;   // "0.5,0.5"
  std::optional<std::string> means;   // "0,0;5,5"
  std::optional<double> sigma2;
  std::optional<int> d;
  long n = 0;
  std::uint64_t seed = 0;
  fs::path out_dir = ".";
};

struct SolveOptions {
  std::optional<fs::path> input;  // points.csv
  std::optional<fs::path> cost;   // cost.csv
  std::string reg = "quadratic";
  std::optional<double> epsilon;
  bool epsilon_auto = false;
  std::optional<double> sigma2;
  std::optional<std::string> theta;
  std::optional<int> k;
  double tol = 1e-8;
  int max_iter = 10000;
  fs::path out = "plan.csv";
};

struct ClusterOptions {
  fs::path plan;
  fs::path points;
  std::string k = "auto";
  std::uint64_t seed = 0;
  fs::path out_dir = ".";
};

struct ValidateOptions {
  std::string suite = "all";
  std::uint64_t seed = 1;
  fs::path out = "report.jsonl";
};

// Each command writes its outputs plus <out dir>/<command>_manifest.json and
// returns a process exit code. Invalid input is reported on `err` with
// kUsageError; no exception escapes.
int cmd_sample(const SampleOptions& opts, std::ostream& out, std::ostream& err);
int cmd_solve(const SolveOptions& opts, std::ostream& out, std::ostream& err);
int cmd_cluster(const ClusterOptions& opts, std::ostream& out, std::ostream& err);
int cmd_validate(const ValidateOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace selfot::cli
