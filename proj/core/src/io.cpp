#include "wrgl/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

#include <nlohmann/json.hpp>

namespace wrgl::io {

using nlohmann::json;

namespace {

json parse_json(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  }
}

template <typename T>
T field(const json& j, const char* key, const char* what) {
  if (!j.is_object() || !j.contains(key)) {
    throw FormatError(std::string(what) + ": missing field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw FormatError(std::string(what) + ": field '" + key + "' has the wrong type");
  }
}

template <typename T>
std::optional<T> optional_field(const json& j, const char* key, const char* what) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return field<T>(j, key, what);
}

json number(double x) { return std::isfinite(x) ? json(x) : json(format_double(x)); }

double parse_double(std::string_view cell) {
  while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
  while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) {
    cell.remove_suffix(1);
  }
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw FormatError("not a number: '" + std::string(cell) + "'");
  }
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  while (!out.empty() && out.back().find_first_not_of(" \t") == std::string_view::npos) {
    out.pop_back();
  }
  return out;
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path.string());
  return ss.str();
}

void write_text_atomic(const fs::path& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move " + tmp.string() + " into place");
  }
}

std::string graph_to_json(const Laplacian& L) {
  const int d = L.dim();
  json edges = json::array();
  for (int j = 1; j <= d; ++j) {
    for (int i = j + 1; i <= d; ++i) {
      const double w = L.weight(i - 1, j - 1);
      if (w > 0.0) edges.push_back({{"i", i}, {"j", j}, {"w", w}});
    }
  }
  return json{{"d", d}, {"edges", std::move(edges)}}.dump(2) + "\n";
}

Laplacian graph_from_json(std::string_view text) {
  const char* what = "graph";
  const json j = parse_json(text, what);
  const int d = field<int>(j, "d", what);
  if (d < 2) throw FormatError("graph: d must be >= 2");
  const json edges = j.contains("edges") ? j.at("edges") : json::array();
  if (!edges.is_array()) throw FormatError("graph: 'edges' must be an array");

  Vector v = Vector::Zero(static_cast<Eigen::Index>(edge_count(d)));
  std::set<std::pair<int, int>> seen;
  for (const json& e : edges) {
    const int i = field<int>(e, "i", what);
    const int jj = field<int>(e, "j", what);
    const double w = field<double>(e, "w", what);
    if (i == jj) throw FormatError("graph: self-loop at vertex " + std::to_string(i));
    if (i < jj) throw FormatError("graph: edge (" + std::to_string(i) + ", " + std::to_string(jj) +
                                  ") must be listed with i > j");
    if (jj < 1 || i > d) throw FormatError("graph: vertex index out of range");
    if (!std::isfinite(w) || w < 0.0) throw FormatError("graph: negative or non-finite weight");
    if (!seen.emplace(i, jj).second) {
      throw FormatError("graph: duplicate edge (" + std::to_string(i) + ", " + std::to_string(jj) +
                        ")");
    }
    v(static_cast<Eigen::Index>(index_map(i, jj, d) - 1)) = w;
  }
  return weights_to_laplacian(WeightVector(d, std::move(v)));
}

void save_graph(const fs::path& path, const Laplacian& L) { write_text_atomic(path, graph_to_json(L)); }

Laplacian load_graph(const fs::path& path) { return graph_from_json(read_text(path)); }

std::string matrix_to_csv(const Matrix& M) {
  std::string out;
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    for (Eigen::Index c = 0; c < M.cols(); ++c) {
      if (c > 0) out += ',';
      out += format_double(M(r, c));
    }
    out += '\n';
  }
  return out;
}

Matrix matrix_from_csv(std::string_view text) {
  std::vector<std::vector<double>> rows;
  for (std::string_view line : lines_of(text)) {
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      row.push_back(parse_double(line.substr(start, comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw FormatError("csv: ragged row " + std::to_string(rows.size() + 1));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return Matrix(0, 0);
  Matrix M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return M;
}

void save_matrix(const fs::path& path, const Matrix& M) { write_text_atomic(path, matrix_to_csv(M)); }

Matrix load_matrix(const fs::path& path) { return matrix_from_csv(read_text(path)); }

void save_labels(const fs::path& path, const std::vector<int>& labels) {
  std::string out;
  for (int l : labels) out += std::to_string(l) + '\n';
  write_text_atomic(path, out);
}

std::vector<int> load_labels(const fs::path& path) {
  const std::string text = read_text(path);
  std::vector<int> out;
  for (std::string_view line : lines_of(text)) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), value);
    if (ec != std::errc() || ptr != line.data() + line.size()) {
      throw FormatError("labels: not an integer: '" + std::string(line) + "'");
    }
    out.push_back(value);
  }
  return out;
}

std::string meta_to_json(const DatasetMeta& meta) {
  json j{{"model", meta.model},
         {"seed", meta.seed},
         {"sigma", meta.sigma ? json(*meta.sigma) : json(nullptr)},
         {"tau", meta.tau ? json(*meta.tau) : json(nullptr)},
         {"noise_sigma", meta.noise_sigma},
         {"N", meta.samples}};
  return j.dump(2) + "\n";
}

DatasetMeta meta_from_json(std::string_view text) {
  const char* what = "meta";
  const json j = parse_json(text, what);
  DatasetMeta m;
  m.model = optional_field<std::string>(j, "model", what).value_or("external");
  m.seed = field<std::uint64_t>(j, "seed", what);
  m.sigma = optional_field<double>(j, "sigma", what);
  m.tau = optional_field<double>(j, "tau", what);
  m.noise_sigma = field<double>(j, "noise_sigma", what);
  m.samples = field<int>(j, "N", what);
  return m;
}

void save_bundle(const fs::path& dir, const Bundle& bundle) {
  if (bundle.signals.rows() != bundle.groundtruth.dim()) {
    throw std::invalid_argument("bundle signals do not match the graph dimension");
  }
  fs::path staging = dir;
  staging += ".partial";
  std::error_code ec;
  fs::remove_all(staging, ec);
  if (!fs::create_directories(staging, ec) || ec) {
    throw IoError("cannot create " + staging.string());
  }
  try {
    save_graph(staging / "graph.json", bundle.groundtruth);
    save_matrix(staging / "signals.csv", bundle.signals);
    if (bundle.labels) save_labels(staging / "labels.csv", *bundle.labels);
    write_text_atomic(staging / "meta.json", meta_to_json(bundle.meta));
    fs::remove_all(dir, ec);
    if (ec) throw IoError("cannot replace " + dir.string());
    fs::rename(staging, dir, ec);
    if (ec) throw IoError("cannot move bundle into " + dir.string());
  } catch (...) {
    fs::remove_all(staging, ec);
    throw;
  }
}

Bundle load_bundle(const fs::path& dir) {
  Laplacian gt = load_graph(dir / "graph.json");
  Matrix signals = load_matrix(dir / "signals.csv");
  if (signals.rows() != gt.dim()) {
    throw FormatError("bundle: signals.csv has " + std::to_string(signals.rows()) +
                      " rows, graph has d = " + std::to_string(gt.dim()));
  }
  std::optional<std::vector<int>> labels;
  if (fs::exists(dir / "labels.csv")) {
    labels = load_labels(dir / "labels.csv");
    if (static_cast<int>(labels->size()) != gt.dim()) {
      throw FormatError("bundle: labels.csv length differs from d");
    }
  }
  DatasetMeta meta = meta_from_json(read_text(dir / "meta.json"));
  return Bundle{std::move(gt), std::move(signals), std::move(labels), std::move(meta)};
}

std::string record_to_json(const SolveRecord& r) {
  json trace = json::array();
  for (double x : r.objective_trace) trace.push_back(number(x));
  json j{{"solver", r.solver},   {"epsilon", r.epsilon},
         {"eta", r.eta},         {"beta", r.beta},
         {"q", number(r.q)},     {"worst_case_risk", number(r.worst_case_risk)},
         {"iterations", r.iterations}, {"converged", r.converged}};
  if (r.gamma) j["gamma"] = number(*r.gamma);
  if (r.degenerate_bisection) j["degenerate_bisection"] = *r.degenerate_bisection;
  j["objective_trace"] = std::move(trace);
  return j.dump(2) + "\n";
}

namespace {

double number_field(const json& j, const char* key, const char* what) {
  if (j.contains(key) && j.at(key).is_string()) return parse_double(j.at(key).get<std::string>());
  return field<double>(j, key, what);
}

}  // namespace

SolveRecord record_from_json(std::string_view text) {
  const char* what = "result";
  const json j = parse_json(text, what);
  SolveRecord r;
  r.solver = field<std::string>(j, "solver", what);
  r.epsilon = field<double>(j, "epsilon", what);
  r.eta = field<double>(j, "eta", what);
  r.beta = field<double>(j, "beta", what);
  r.q = number_field(j, "q", what);
  if (j.contains("gamma")) r.gamma = number_field(j, "gamma", what);
  r.worst_case_risk = number_field(j, "worst_case_risk", what);
  r.iterations = field<int>(j, "iterations", what);
  r.converged = field<bool>(j, "converged", what);
  r.degenerate_bisection = optional_field<bool>(j, "degenerate_bisection", what);
  if (j.contains("objective_trace")) {
    for (const json& x : j.at("objective_trace")) {
      r.objective_trace.push_back(x.is_string() ? parse_double(x.get<std::string>())
                                                : x.get<double>());
    }
  }
  return r;
}

std::string metrics_to_json(const MetricsReport& report) {
  json j{{"mcc", report.mcc}, {"dog", number(report.dog)}};
  j["reliability"] = report.reliability ? json(*report.reliability) : json(nullptr);
  j["nmi"] = report.nmi ? json(*report.nmi) : json(nullptr);
  return j.dump(2) + "\n";
}

std::string metrics_csv_header() { return "mcc,dog,reliability,nmi\n"; }

std::string metrics_csv_row(const MetricsReport& report) {
  std::string out = format_double(report.mcc) + ',' + format_double(report.dog) + ',';
  if (report.reliability) out += format_double(*report.reliability);
  out += ',';
  if (report.nmi) out += format_double(*report.nmi);
  out += '\n';
  return out;
}

}  // namespace wrgl::io
