// wrgl: generate datasets, learn graphs, evaluate them and run sweeps.
//
// Exit codes: 0 success (non-convergence is recorded, not fatal),
// 1 every sweep row failed, 2 usage or validation error, 3 I/O error.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wrgl/experiment.hpp"
#include "wrgl/general_solver.hpp"
#include "wrgl/io.hpp"
#include "wrgl/metrics.hpp"

namespace fs = std::filesystem;
using namespace wrgl;

namespace {

constexpr int kUsage = 2;
constexpr int kIo = 3;

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

void require_dir(const fs::path& p, const char* what) {
  if (!fs::is_directory(p)) throw UsageError(std::string(what) + " not found: " + p.string());
}

void require_file(const fs::path& p, const char* what) {
  if (!fs::is_regular_file(p)) throw UsageError(std::string(what) + " not found: " + p.string());
}

fs::path graph_path(const fs::path& p) { return fs::is_directory(p) ? p / "graph.json" : p; }

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec || !fs::is_directory(p)) throw io::IoError("cannot create directory " + p.string());
}

double parse_order(const std::string& text) {
  if (text == "inf" || text == "Inf" || text == "infinity") return kInfinity;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size()) throw UsageError("not a norm order: '" + text + "'");
  return v;
}

struct SolverFlags {
  std::string solver = "saa";
  double epsilon = 0.0;
  double eta = 0.1;
  std::optional<double> beta;
  std::string q = "2";

  void attach(CLI::App* cmd) {
    cmd->add_option("--solver", solver, "saa, wdro-gaussian or wdro-general")
        ->check(CLI::IsMember({"saa", "wdro-gaussian", "wdro-general"}))
        ->capture_default_str();
    cmd->add_option("--epsilon", epsilon, "Wasserstein radius")->capture_default_str();
    cmd->add_option("--eta", eta, "Frobenius weight")->capture_default_str();
    cmd->add_option("--beta", beta, "trace-penalty weight (default 0.5 d)");
    cmd->add_option("--q", q, "dual norm order for wdro-general, 1 to inf")->capture_default_str();
  }

  SolverSettings settings() const {
    return SolverSettings{parse_solver(solver), epsilon, eta, beta, parse_order(q)};
  }
};

int cmd_generate(const fs::path& spec_path, const fs::path& out) {
  require_file(spec_path, "spec file");
  const GenerateSpec spec = generate_spec_from_json(io::read_text(spec_path));
  const io::Bundle bundle = generate_bundle(spec);
  io::save_bundle(out, bundle);
  std::cout << "wrote " << out.string() << " (d=" << bundle.groundtruth.dim() << ", N=" << spec.samples
            << ")\n";
  return 0;
}

int cmd_learn(const fs::path& data, const SolverFlags& flags, double prune, const fs::path& out) {
  require_dir(data, "dataset bundle");
  const io::Bundle bundle = io::load_bundle(data);
  const LearnOutcome res = learn_graph(bundle.signals, flags.settings());
  const Laplacian pruned = prune_edges(res.laplacian, prune);
  if (!validate_laplacian(pruned.matrix(), 1e-8).ok()) {
    throw std::runtime_error("learned graph failed validation");
  }
  ensure_dir(out);
  io::save_graph(out / "graph.json", pruned);
  io::write_text_atomic(out / "result.json", io::record_to_json(res.record));
  std::cout << "solver=" << res.record.solver << " R*=" << io::format_double(res.record.worst_case_risk)
            << " iterations=" << res.record.iterations
            << " converged=" << (res.record.converged ? "true" : "false") << '\n';
  return 0;
}

struct EvaluateFlags {
  fs::path graph;
  fs::path truth;
  double threshold = kDefaultEdgeThreshold;
  fs::path test;
  fs::path result;
  fs::path labels_true;
  fs::path labels_pred;
  std::string format = "json";
  fs::path out;
};

int cmd_evaluate(const EvaluateFlags& f) {
  const fs::path learned_path = graph_path(f.graph);
  const fs::path truth_path = graph_path(f.truth);
  require_file(learned_path, "learned graph");
  require_file(truth_path, "ground-truth graph");
  const Laplacian learned = io::load_graph(learned_path);
  const Laplacian truth = io::load_graph(truth_path);
  if (learned.dim() != truth.dim()) throw UsageError("graph dimensions differ");

  MetricsReport report;
  report.mcc = mcc(learned, truth, f.threshold);
  report.dog = dog(learned, truth);
  if (!f.test.empty() || !f.result.empty()) {
    if (f.test.empty() || f.result.empty()) throw UsageError("--test and --result go together");
    require_file(f.test, "test signals");
    require_file(f.result, "result file");
    const SignalMatrix test = io::load_matrix(f.test);
    if (test.cols() == 0) throw UsageError("test split is empty");
    const io::SolveRecord rec = io::record_from_json(io::read_text(f.result));
    report.reliability = reliability(test, learned, rec.eta, rec.worst_case_risk);
  }
  if (!f.labels_true.empty() || !f.labels_pred.empty()) {
    if (f.labels_true.empty() || f.labels_pred.empty()) {
      throw UsageError("--labels-true and --labels-pred go together");
    }
    require_file(f.labels_true, "labels");
    require_file(f.labels_pred, "labels");
    report.nmi = nmi(io::load_labels(f.labels_true), io::load_labels(f.labels_pred));
  }

  const std::string text = f.format == "csv"
                               ? io::metrics_csv_header() + io::metrics_csv_row(report)
                               : io::metrics_to_json(report);
  if (f.out.empty()) {
    std::cout << text;
  } else {
    io::write_text_atomic(f.out, text);
  }
  return 0;
}

int cmd_sweep(const fs::path& config_path, const std::optional<std::string>& out_dir, int jobs,
              bool timing, bool select_best) {
  require_file(config_path, "config file");
  ExperimentConfig config = config_from_json(io::read_text(config_path));
  if (out_dir) config.out_dir = *out_dir;
  const fs::path out = config.out_dir;
  ensure_dir(out);

  const std::vector<SweepRow> rows = run_sweep(config, SweepOptions{resolve_jobs(jobs), timing});
  io::write_text_atomic(out / "results.csv", sweep_csv(rows));
  const std::vector<SweepSummary> summary = summarize(rows);
  io::write_text_atomic(out / "summary.csv", summary_csv(summary));

  std::size_t failed = 0;
  for (const SweepRow& r : rows) {
    if (!r.error.empty()) ++failed;
  }
  if (select_best) {
    const std::string best = summary_csv(best_epsilon(summary));
    io::write_text_atomic(out / "best_epsilon.csv", best);
    std::cout << best;
  }
  std::cout << rows.size() << " rows (" << failed << " failed) -> " << (out / "results.csv").string()
            << '\n';
  if (!rows.empty() && failed == rows.size()) {
    std::cerr << "error: every sweep row failed, first error: " << rows.front().error << '\n';
    return 1;
  }
  return 0;
}

struct ReliabilityFlags {
  fs::path data;
  SolverFlags solver;
  std::vector<double> epsilons;
  int test_columns = 0;
  double test_fraction = 0.0;
  fs::path out;
};

int cmd_reliability(const ReliabilityFlags& f) {
  require_dir(f.data, "dataset bundle");
  const io::Bundle bundle = io::load_bundle(f.data);
  const auto total = static_cast<int>(bundle.signals.cols());
  int held_out = f.test_columns;
  if (held_out == 0 && f.test_fraction > 0.0) {
    held_out = static_cast<int>(std::floor(f.test_fraction * total));
  }
  if (held_out <= 0) throw UsageError("test split is empty");
  if (held_out >= total) throw UsageError("test split leaves no training columns");
  const SignalMatrix train = bundle.signals.leftCols(total - held_out);
  const SignalMatrix test = bundle.signals.rightCols(held_out);

  std::vector<double> eps = f.epsilons;
  if (eps.empty()) eps = {f.solver.epsilon};
  const std::vector<ReliabilityPoint> curve =
      reliability_curve(train, test, f.solver.settings(), eps);
  const std::string text = reliability_csv(curve);
  if (f.out.empty()) {
    std::cout << text;
  } else {
    io::write_text_atomic(f.out, text);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributionally robust graph learning from smooth signals"};
  app.require_subcommand(1);

  fs::path spec_path, gen_out;
  auto* gen = app.add_subcommand("generate", "write a synthetic dataset bundle");
  gen->add_option("--spec", spec_path, "JSON spec (model, d, sigma, tau, N, noise_sigma, seed, ...)")
      ->required();
  gen->add_option("--out", gen_out, "bundle directory")->required();

  fs::path learn_data, learn_out;
  SolverFlags learn_flags;
  double prune = kDefaultEdgeThreshold;
  auto* learn = app.add_subcommand("learn", "learn a graph from a dataset bundle");
  learn->add_option("--data", learn_data, "dataset bundle directory")->required();
  learn_flags.attach(learn);
  learn->add_option("--prune", prune, "drop edges lighter than this before saving")
      ->capture_default_str();
  learn->add_option("--out", learn_out, "output directory for graph.json and result.json")
      ->required();

  EvaluateFlags ev;
  auto* evaluate = app.add_subcommand("evaluate", "score a learned graph");
  evaluate->add_option("--graph", ev.graph, "learned graph.json or its directory")->required();
  evaluate->add_option("--truth", ev.truth, "ground-truth graph.json or bundle directory")->required();
  evaluate->add_option("--threshold", ev.threshold, "edge-presence threshold")->capture_default_str();
  evaluate->add_option("--test", ev.test, "held-out signals CSV (d rows)");
  evaluate->add_option("--result", ev.result, "result.json written by learn");
  evaluate->add_option("--labels-true", ev.labels_true, "reference labels");
  evaluate->add_option("--labels-pred", ev.labels_pred, "predicted labels");
  evaluate->add_option("--format", ev.format)->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  evaluate->add_option("--out", ev.out, "write here instead of stdout");

  fs::path config_path;
  std::optional<std::string> sweep_out;
  int jobs = 1;
  bool timing = false;
  bool select_best = false;
  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep from a JSON config");
  sweep->add_option("--config", config_path, "experiment config JSON")->required();
  sweep->add_option("--out-dir", sweep_out, "overrides out_dir from the config");
  sweep->add_option("--jobs", jobs, "concurrent trials (WDRO_JOBS overrides)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sweep->add_flag("--timing", timing, "fill runtime_ms (output is then not reproducible)");
  sweep->add_flag("--select-best-epsilon", select_best,
                  "also write best_epsilon.csv with the max-mean-MCC epsilon per setting");

  ReliabilityFlags rel;
  auto* reliab = app.add_subcommand("reliability", "certificate reliability over an epsilon grid");
  reliab->add_option("--data", rel.data, "dataset bundle directory")->required();
  rel.solver.attach(reliab);
  reliab->add_option("--epsilons", rel.epsilons, "comma-separated epsilon grid")->delimiter(',');
  auto* cols = reliab->add_option("--test-columns", rel.test_columns, "hold out the last K columns");
  reliab->add_option("--test-fraction", rel.test_fraction, "hold out this fraction of columns")
      ->check(CLI::Range(0.0, 1.0))
      ->excludes(cols);
  reliab->add_option("--out", rel.out, "write the curve here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kUsage;
  }

  try {
    if (*gen) return cmd_generate(spec_path, gen_out);
    if (*learn) return cmd_learn(learn_data, learn_flags, prune, learn_out);
    if (*evaluate) return cmd_evaluate(ev);
    if (*sweep) return cmd_sweep(config_path, sweep_out, jobs, timing, select_best);
    if (*reliab) return cmd_reliability(rel);
  } catch (const io::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kUsage;
}
