#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wrgl/graph.hpp"
#include "wrgl/io.hpp"
#include "wrgl/moments.hpp"

namespace wrgl {

enum class SolverKind { saa, wdro_gaussian, wdro_general };

std::string_view to_string(SolverKind kind);
/// Accepts "saa", "wdro-gaussian", "wdro-general". Throws std::invalid_argument otherwise.
SolverKind parse_solver(std::string_view name);

struct SolverSettings {
  SolverKind kind = SolverKind::saa;
  double epsilon = 0.0;
  double eta = 0.1;
  std::optional<double> beta;
  double q = 2.0;  // dual norm order, wdro-general only
};

struct LearnOutcome {
  Laplacian laplacian;  // trace normalized, not pruned
  io::SolveRecord record;
};

/// Runs the solver named by `settings` from the uniform complete graph.
LearnOutcome learn_graph(const SignalMatrix& X, const SolverSettings& settings);

/// Synthetic data recipe. "rbf" uses d, sigma, tau; "sbm" uses cluster_sizes, p_in, p_out.
struct GraphModel {
  std::string model = "rbf";
  int d = 20;
  double sigma = 0.5;
  double tau = 0.7;
  std::vector<int> cluster_sizes{15, 15, 15};
  double p_in = 0.3;
  double p_out = 0.02;
};

struct GenerateSpec {
  GraphModel graph;
  int samples = 100;
  double noise_sigma = 0.1;
  std::uint64_t seed = 0;
};

/// Keys: model, d, sigma, tau, cluster_sizes, p_in, p_out, N, noise_sigma, seed.
/// Throws io::FormatError for malformed or out-of-range values.
GenerateSpec generate_spec_from_json(std::string_view text);
Dataset make_dataset(const GraphModel& graph, int samples, double noise_sigma,
                     std::uint64_t seed);
io::Bundle generate_bundle(const GenerateSpec& spec);

struct SweepGrids {
  std::vector<double> epsilon;
  std::vector<int> samples;  // N
  std::vector<double> sigma_w;
  std::vector<double> p;  // Wasserstein norm order; q is its dual
  std::vector<double> eta;
};

/// Grid ranges used when neither a grid nor the matching scalar is configured.
SweepGrids default_grids();

struct ExperimentConfig {
  SolverKind solver = SolverKind::wdro_general;
  std::optional<double> beta;
  GraphModel graph;
  SweepGrids grids;
  int trials = 20;
  std::uint64_t base_seed = 0;
  std::string out_dir = ".";
  int test_samples = 1000;  // held-out signals per trial for reliability; 0 disables
  double edge_threshold = 1e-4;

  /// Throws std::invalid_argument when a grid is empty or a value is out of range.
  void validate() const;
};

/// Keys: solver, epsilon, eta, beta, q, grids{epsilon, N, sigma_w, p, eta},
/// trials, base_seed, out_dir, graph{...}, test_samples, edge_threshold.
/// A missing grid falls back to the scalar of the same name, then to default_grids().
ExperimentConfig config_from_json(std::string_view text);

struct SweepRow {
  int trial = 0;
  std::uint64_t seed = 0;
  int samples = 0;
  double sigma_w = 0.0;
  double p = 2.0;
  double eta = 0.0;
  double epsilon = 0.0;
  double mcc = 0.0;
  double dog = 0.0;
  std::optional<double> reliability;
  double objective = 0.0;
  double runtime_ms = 0.0;
  bool converged = false;
  std::string error;  // empty when the row succeeded
};

struct SweepOptions {
  int jobs = 1;
  bool timing = false;  // runtime_ms stays 0 otherwise
};

/// One row per grid point and trial, ordered N, sigma_w, p, eta, epsilon, trial
/// regardless of scheduling. Trial t uses seed base_seed + t.
std::vector<SweepRow> run_sweep(const ExperimentConfig& config, const SweepOptions& options);

std::string sweep_csv(const std::vector<SweepRow>& rows);

struct SweepSummary {
  int samples = 0;
  double sigma_w = 0.0;
  double p = 2.0;
  double eta = 0.0;
  double epsilon = 0.0;
  int trials = 0;  // successful rows averaged
  double mean_mcc = 0.0;
  double mean_dog = 0.0;
  std::optional<double> mean_reliability;
  double mean_objective = 0.0;
};

/// Mean over trials of every grid point, in sweep order. Failed rows are skipped.
std::vector<SweepSummary> summarize(const std::vector<SweepRow>& rows);

/// For each (N, sigma_w, p, eta) the grid point with the largest mean MCC
/// (first one on ties).
std::vector<SweepSummary> best_epsilon(const std::vector<SweepSummary>& summary);

std::string summary_csv(const std::vector<SweepSummary>& summary);

struct ReliabilityPoint {
  double epsilon = 0.0;
  double reliability = 0.0;
  double worst_case_risk = 0.0;
  bool converged = false;
};

/// Learns a graph on `train` for every epsilon and scores it on `test`.
/// Throws std::invalid_argument for an empty split.
std::vector<ReliabilityPoint> reliability_curve(const SignalMatrix& train, const SignalMatrix& test,
                                                const SolverSettings& base,
                                                const std::vector<double>& epsilons);

std::string reliability_csv(const std::vector<ReliabilityPoint>& points);

/// `requested`, unless WDRO_JOBS holds a positive integer. Never below 1.
int resolve_jobs(int requested);

}  // namespace wrgl
