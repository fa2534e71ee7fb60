#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "selfot/types.hpp"

namespace selfot::io {

// Dense CSV, no header, one row per line, reals printed with 17 significant digits.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_csv(const std::filesystem::path& path);

// One integer per line.
void write_labels_csv(const std::filesystem::path& path, const IntVector& labels);
IntVector read_labels_csv(const std::filesystem::path& path);

// Two columns: first, second.
void write_potentials_csv(const std::filesystem::path& path, const Vector& first, const Vector& second);

std::string format_real(double v);

// "1,2;3,4" -> {{1,2},{3,4}}; a single list "0.5,0.5" -> {{0.5,0.5}}.
std::vector<std::vector<double>> parse_real_groups(const std::string& text);
std::vector<double> parse_real_list(const std::string& text);

// Lower-case hex SHA-256 of the file contents.
std::string sha256_file(const std::filesystem::path& path);

// Records what a command produced. Artifact keys are file names relative to
// the manifest's directory.
class RunManifest {
 public:
  explicit RunManifest(std::string command) : command_(std::move(command)) {}

  void set_seed(long long seed) { seed_ = seed; }
  template <typename T>
  void param(const std::string& key, const T& value) {
    params_[key] = value;
  }
  void extra(const std::string& key, nlohmann::json value) { extra_[key] = std::move(value); }
  void add_artifact(const std::filesystem::path& path) { artifacts_.push_back(path); }

  nlohmann::json to_json() const;
  // Hashes every artifact and writes <dir>/<command>_manifest.json; returns its path.
  std::filesystem::path write(const std::filesystem::path& dir) const;

 private:
  std::string command_;
  std::optional<long long> seed_;
  nlohmann::json params_ = nlohmann::json::object();
  nlohmann::json extra_ = nlohmann::json::object();
  std::vector<std::filesystem::path> artifacts_;
};

}  // namespace selfot::io
