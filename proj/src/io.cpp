#include "selfot/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

namespace selfot::io {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) throw InvalidArgument("empty numeric field");
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) throw InvalidArgument("not a number: '" + s + "'");
  return v;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  return out;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open for reading: " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace

std::string format_real(double v) {
  std::array<char, 40> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

void write_matrix_csv(const fs::path& path, const Matrix& m) {
  auto out = open_out(path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_real(m(i, j));
    }
    out << '\n';
  }
}

Matrix read_matrix_csv(const fs::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw InvalidArgument("empty CSV file: " + path.string());
  std::vector<std::vector<double>> rows;
  for (const auto& line : lines) {
    std::vector<double> row;
    for (const auto& f : split(line, ',')) row.push_back(parse_real(f));
    if (!rows.empty() && row.size() != rows.front().size())
      throw InvalidArgument("ragged CSV rows in " + path.string());
    rows.push_back(std::move(row));
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

void write_labels_csv(const fs::path& path, const IntVector& labels) {
  auto out = open_out(path);
  for (Eigen::Index i = 0; i < labels.size(); ++i) out << labels(i) << '\n';
}

IntVector read_labels_csv(const fs::path& path) {
  const auto lines = read_lines(path);
  IntVector out(static_cast<Eigen::Index>(lines.size()));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::size_t used = 0;
    const int v = std::stoi(lines[i], &used);
    if (used != lines[i].size()) throw InvalidArgument("not an integer label: '" + lines[i] + "'");
    out(static_cast<Eigen::Index>(i)) = v;
  }
  return out;
}

void write_potentials_csv(const fs::path& path, const Vector& first, const Vector& second) {
  if (first.size() != second.size()) throw InvalidArgument("potential vectors differ in length");
  auto out = open_out(path);
  for (Eigen::Index i = 0; i < first.size(); ++i)
    out << format_real(first(i)) << ',' << format_real(second(i)) << '\n';
}

std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& f : split(text, ',')) out.push_back(parse_real(f));
  if (out.empty()) throw InvalidArgument("empty list");
  return out;
}

std::vector<std::vector<double>> parse_real_groups(const std::string& text) {
  std::vector<std::vector<double>> out;
  for (const auto& g : split(text, ';')) out.push_back(parse_real_list(g));
  return out;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot hash missing file: " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i)
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return hex.str();
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["command"] = command_;
  j["parameters"] = params_;
  j["seed"] = seed_ ? nlohmann::json(*seed_) : nlohmann::json(nullptr);
  nlohmann::json hashes = nlohmann::json::object();
  for (const auto& a : artifacts_) hashes[a.filename().string()] = sha256_file(a);
  j["artifacts"] = hashes;
  for (const auto& [k, v] : extra_.items()) j[k] = v;
  return j;
}

fs::path RunManifest::write(const fs::path& dir) const {
  const fs::path path = dir / (command_ + "_manifest.json");
  const std::string text = to_json().dump(2) + "\n";
  auto out = open_out(path);
  out << text;
  return path;
}

}  // namespace selfot::io
