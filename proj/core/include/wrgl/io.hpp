#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wrgl/graph.hpp"
#include "wrgl/metrics.hpp"
#include "wrgl/moments.hpp"
#include "wrgl/synthdata.hpp"

namespace wrgl::io {

namespace fs = std::filesystem;

/// Malformed or inconsistent file content.
class FormatError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The file system refused a read or write.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal text that parses back to the same double ("inf", "-inf", "nan" otherwise).
std::string format_double(double x);

std::string read_text(const fs::path& path);
/// Writes to a sibling temporary file, then renames it over `path`.
void write_text_atomic(const fs::path& path, std::string_view content);

// Graph files: {"d": int, "edges": [{"i": int, "j": int, "w": float}, ...]}, 1-based, i > j.
// Only edges with positive weight are written.
std::string graph_to_json(const Laplacian& L);
Laplacian graph_from_json(std::string_view text);
void save_graph(const fs::path& path, const Laplacian& L);
Laplacian load_graph(const fs::path& path);

// Plain comma-separated rows, no header. Signals are d rows by N columns.
std::string matrix_to_csv(const Matrix& M);
Matrix matrix_from_csv(std::string_view text);
void save_matrix(const fs::path& path, const Matrix& M);
Matrix load_matrix(const fs::path& path);

/// One integer label per line.
void save_labels(const fs::path& path, const std::vector<int>& labels);
std::vector<int> load_labels(const fs::path& path);

struct DatasetMeta {
  std::string model;  // "rbf", "sbm" or "external"
  std::uint64_t seed = 0;
  std::optional<double> sigma;
  std::optional<double> tau;
  double noise_sigma = 0.0;
  int samples = 0;
};

std::string meta_to_json(const DatasetMeta& meta);
DatasetMeta meta_from_json(std::string_view text);

struct Bundle {
  Laplacian groundtruth;
  SignalMatrix signals;
  std::optional<std::vector<int>> labels;
  DatasetMeta meta;
};

/// graph.json, signals.csv, labels.csv (when labels are present) and meta.json.
/// The directory is assembled under a temporary name and renamed into place;
/// an existing bundle at `dir` is replaced.
void save_bundle(const fs::path& dir, const Bundle& bundle);
Bundle load_bundle(const fs::path& dir);

struct SolveRecord {
  std::string solver;
  double epsilon = 0.0;
  double eta = 0.0;
  double beta = 0.0;
  double q = 2.0;
  std::optional<double> gamma;  // Gaussian solver only
  double worst_case_risk = 0.0;
  int iterations = 0;
  bool converged = false;
  std::optional<bool> degenerate_bisection;
  std::vector<double> objective_trace;
};

std::string record_to_json(const SolveRecord& record);
SolveRecord record_from_json(std::string_view text);

std::string metrics_to_json(const MetricsReport& report);
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsReport& report);

}  // namespace wrgl::io
