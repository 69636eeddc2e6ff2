#include "wrgl/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include <nlohmann/json.hpp>

#include "wrgl/gaussian_solver.hpp"
#include "wrgl/general_solver.hpp"
#include "wrgl/metrics.hpp"
#include "wrgl/random.hpp"
#include "wrgl/synthdata.hpp"

namespace wrgl {

using nlohmann::json;

std::string_view to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::saa: return "saa";
    case SolverKind::wdro_gaussian: return "wdro-gaussian";
    case SolverKind::wdro_general: return "wdro-general";
  }
  return "unknown";
}

SolverKind parse_solver(std::string_view name) {
  if (name == "saa") return SolverKind::saa;
  if (name == "wdro-gaussian") return SolverKind::wdro_gaussian;
  if (name == "wdro-general") return SolverKind::wdro_general;
  throw std::invalid_argument("unknown solver '" + std::string(name) +
                              "' (expected saa, wdro-gaussian or wdro-general)");
}

LearnOutcome learn_graph(const SignalMatrix& X, const SolverSettings& settings) {
  const EmpiricalMoments moments = empirical_moments(X);
  const int d = moments.dim();
  io::SolveRecord record;
  record.solver = std::string(to_string(settings.kind));
  record.eta = settings.eta;

  if (settings.kind == SolverKind::wdro_gaussian) {
    GaussianSolverConfig cfg;
    cfg.epsilon = settings.epsilon;
    cfg.eta = settings.eta;
    cfg.beta = settings.beta;
    GaussianSolveResult res = solve_gaussian(moments, cfg);
    record.epsilon = cfg.epsilon;
    record.beta = cfg.beta_for(d);
    record.q = 2.0;
    record.gamma = res.gamma;
    record.worst_case_risk = res.worst_case_risk;
    record.iterations = res.iterations;
    record.converged = res.converged;
    record.degenerate_bisection = res.degenerate_bisection;
    record.objective_trace = std::move(res.objective_trace);
    return LearnOutcome{std::move(res.laplacian), std::move(record)};
  }

  GeneralSolverConfig cfg;
  cfg.epsilon = settings.kind == SolverKind::saa ? 0.0 : settings.epsilon;
  cfg.eta = settings.eta;
  cfg.beta = settings.beta;
  cfg.q = settings.q;
  const WeightVector v0 = uniform_complete_weights(d);
  GeneralSolveResult res = settings.kind == SolverKind::saa ? solve_saa(moments.theta(), cfg, v0)
                                                            : solve_general(moments.theta(), cfg, v0);
  record.epsilon = cfg.epsilon;
  record.beta = cfg.beta_for(d);
  record.q = cfg.q;
  record.worst_case_risk = res.worst_case_risk;
  record.iterations = res.iterations;
  record.converged = res.converged;
  record.objective_trace = std::move(res.objective_trace);
  return LearnOutcome{std::move(res.laplacian), std::move(record)};
}

namespace {

const char* kWhat = "config";

double json_real(const json& j, const char* what) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "Infinity") return kInfinity;
    throw io::FormatError(std::string(what) + ": expected a number, got '" + s + "'");
  }
  if (!j.is_number()) throw io::FormatError(std::string(what) + ": expected a number");
  return j.get<double>();
}

int json_int(const json& j, const char* what) {
  if (!j.is_number_integer()) throw io::FormatError(std::string(what) + ": expected an integer");
  return j.get<int>();
}

std::vector<double> real_list(const json& j, const char* what) {
  if (!j.is_array()) throw io::FormatError(std::string(what) + ": expected an array");
  std::vector<double> out;
  for (const json& x : j) out.push_back(json_real(x, what));
  return out;
}

std::vector<int> int_list(const json& j, const char* what) {
  if (!j.is_array()) throw io::FormatError(std::string(what) + ": expected an array");
  std::vector<int> out;
  for (const json& x : j) out.push_back(json_int(x, what));
  return out;
}

json parse(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw io::FormatError(std::string(what) + ": " + e.what());
  }
}

GraphModel graph_model_from(const json& j) {
  GraphModel g;
  if (j.contains("model")) g.model = j.at("model").get<std::string>();
  if (g.model != "rbf" && g.model != "sbm") {
    throw io::FormatError("graph model must be 'rbf' or 'sbm', got '" + g.model + "'");
  }
  if (j.contains("d")) g.d = json_int(j.at("d"), "d");
  if (j.contains("sigma")) g.sigma = json_real(j.at("sigma"), "sigma");
  if (j.contains("tau")) g.tau = json_real(j.at("tau"), "tau");
  if (j.contains("cluster_sizes")) g.cluster_sizes = int_list(j.at("cluster_sizes"), "cluster_sizes");
  if (j.contains("p_in")) g.p_in = json_real(j.at("p_in"), "p_in");
  if (j.contains("p_out")) g.p_out = json_real(j.at("p_out"), "p_out");
  return g;
}

void validate_graph_model(const GraphModel& g) {
  if (g.model == "rbf") {
    if (g.d < 2) throw std::invalid_argument("rbf graph needs d >= 2");
    if (!(g.sigma > 0.0)) throw std::invalid_argument("rbf sigma must be > 0");
    if (!(g.tau >= 0.0 && g.tau <= 1.0)) throw std::invalid_argument("rbf tau must be in [0, 1]");
  } else if (g.model == "sbm") {
    int total = 0;
    for (int s : g.cluster_sizes) {
      if (s < 1) throw std::invalid_argument("sbm cluster sizes must be >= 1");
      total += s;
    }
    if (total < 2) throw std::invalid_argument("sbm graph needs at least 2 vertices");
    if (!(g.p_in >= 0.0 && g.p_in <= 1.0 && g.p_out >= 0.0 && g.p_out <= 1.0)) {
      throw std::invalid_argument("sbm probabilities must be in [0, 1]");
    }
  } else {
    throw std::invalid_argument("unknown graph model '" + g.model + "'");
  }
}

}  // namespace

GenerateSpec generate_spec_from_json(std::string_view text) {
  const json j = parse(text, "spec");
  if (!j.is_object()) throw io::FormatError("spec: expected a JSON object");
  GenerateSpec spec;
  try {
    spec.graph = graph_model_from(j);
    if (j.contains("N")) spec.samples = json_int(j.at("N"), "N");
    if (j.contains("noise_sigma")) spec.noise_sigma = json_real(j.at("noise_sigma"), "noise_sigma");
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    validate_graph_model(spec.graph);
  } catch (const json::exception& e) {
    throw io::FormatError(std::string("spec: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw io::FormatError(std::string("spec: ") + e.what());
  }
  if (spec.samples < 1) throw io::FormatError("spec: N must be >= 1");
  if (!(spec.noise_sigma >= 0.0)) throw io::FormatError("spec: noise_sigma must be >= 0");
  return spec;
}

Dataset make_dataset(const GraphModel& graph, int samples, double noise_sigma,
                     std::uint64_t seed) {
  validate_graph_model(graph);
  if (graph.model == "sbm") {
    return make_sbm_dataset({graph.cluster_sizes, graph.p_in, graph.p_out, samples, noise_sigma, seed});
  }
  return make_rbf_dataset({graph.d, graph.sigma, graph.tau, samples, noise_sigma, seed});
}

io::Bundle generate_bundle(const GenerateSpec& spec) {
  Dataset ds = make_dataset(spec.graph, spec.samples, spec.noise_sigma, spec.seed);
  io::DatasetMeta meta;
  meta.model = spec.graph.model;
  meta.seed = spec.seed;
  if (spec.graph.model == "rbf") {
    meta.sigma = spec.graph.sigma;
    meta.tau = spec.graph.tau;
  }
  meta.noise_sigma = spec.noise_sigma;
  meta.samples = spec.samples;
  return io::Bundle{std::move(ds.groundtruth), std::move(ds.signals), std::move(ds.labels),
                    std::move(meta)};
}

SweepGrids default_grids() {
  SweepGrids g;
  g.epsilon = {0.025, 0.05, 0.1, 0.2, 0.4, 0.8, 1.6};
  g.samples = {50, 100, 200, 1000};
  g.sigma_w = {0.1, 0.2, 0.5, 1.0};
  g.p = {1.0, 4.0 / 3.0, 1.5, 2.0, 3.0, 4.0, kInfinity};
  g.eta = {0.1};
  return g;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("config: " + what); };
  if (trials < 1) fail("trials must be >= 1");
  if (grids.epsilon.empty() || grids.samples.empty() || grids.sigma_w.empty() || grids.p.empty() ||
      grids.eta.empty()) {
    fail("grids must be non-empty");
  }
  for (double e : grids.epsilon) {
    if (!(e >= 0.0) || !std::isfinite(e)) fail("epsilon values must be finite and >= 0");
    if (solver == SolverKind::wdro_gaussian && !(e > 0.0)) fail("wdro-gaussian needs epsilon > 0");
  }
  for (int n : grids.samples) {
    if (n < 1) fail("N values must be >= 1");
  }
  for (double s : grids.sigma_w) {
    if (!(s >= 0.0) || !std::isfinite(s)) fail("sigma_w values must be finite and >= 0");
  }
  for (double p : grids.p) {
    if (!(p >= 1.0)) fail("p values must be >= 1");
  }
  for (double e : grids.eta) {
    if (!(e >= 0.0) || !std::isfinite(e)) fail("eta values must be finite and >= 0");
  }
  if (beta && !(*beta > 0.0)) fail("beta must be > 0");
  if (test_samples < 0) fail("test_samples must be >= 0");
  if (!(edge_threshold >= 0.0)) fail("edge_threshold must be >= 0");
  validate_graph_model(graph);
}

ExperimentConfig config_from_json(std::string_view text) {
  const json j = parse(text, kWhat);
  if (!j.is_object()) throw io::FormatError("config: expected a JSON object");
  ExperimentConfig c;
  const SweepGrids defaults = default_grids();
  try {
    if (j.contains("solver")) c.solver = parse_solver(j.at("solver").get<std::string>());
    if (j.contains("beta") && !j.at("beta").is_null()) c.beta = json_real(j.at("beta"), "beta");
    if (j.contains("trials")) c.trials = json_int(j.at("trials"), "trials");
    if (j.contains("base_seed")) c.base_seed = j.at("base_seed").get<std::uint64_t>();
    if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
    if (j.contains("test_samples")) c.test_samples = json_int(j.at("test_samples"), "test_samples");
    if (j.contains("edge_threshold")) {
      c.edge_threshold = json_real(j.at("edge_threshold"), "edge_threshold");
    }
    if (j.contains("graph")) c.graph = graph_model_from(j.at("graph"));

    const json grids = j.contains("grids") ? j.at("grids") : json::object();
    if (!grids.is_object()) throw io::FormatError("config: 'grids' must be an object");
    auto reals = [&](const char* key, std::optional<double> scalar, std::vector<double> fallback) {
      if (grids.contains(key)) return real_list(grids.at(key), key);
      if (scalar) return std::vector<double>{*scalar};
      return fallback;
    };
    auto scalar = [&](const char* key) -> std::optional<double> {
      if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
      return json_real(j.at(key), key);
    };
    c.grids.epsilon = reals("epsilon", scalar("epsilon"), defaults.epsilon);
    c.grids.eta = reals("eta", scalar("eta"), defaults.eta);
    c.grids.sigma_w = reals("sigma_w", scalar("sigma_w"), defaults.sigma_w);
    std::optional<double> p_scalar;
    if (auto q = scalar("q")) p_scalar = qnorm_dual(*q);
    c.grids.p = reals("p", p_scalar, defaults.p);
    if (grids.contains("N")) {
      c.grids.samples = int_list(grids.at("N"), "N");
    } else if (j.contains("N")) {
      c.grids.samples = {json_int(j.at("N"), "N")};
    } else {
      c.grids.samples = defaults.samples;
    }
    c.validate();
  } catch (const json::exception& e) {
    throw io::FormatError(std::string("config: ") + e.what());
  } catch (const io::FormatError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw io::FormatError(e.what());
  }
  return c;
}

namespace {

SweepGrids effective_grids(const ExperimentConfig& c) {
  SweepGrids g = c.grids;
  if (c.solver == SolverKind::saa) {
    g.epsilon = {0.0};
    g.p = {2.0};
  } else if (c.solver == SolverKind::wdro_gaussian) {
    g.p = {2.0};
  }
  return g;
}

}  // namespace

std::vector<SweepRow> run_sweep(const ExperimentConfig& config, const SweepOptions& options) {
  config.validate();
  const SweepGrids g = effective_grids(config);
  const std::size_t nN = g.samples.size(), nS = g.sigma_w.size(), nP = g.p.size(),
                    nH = g.eta.size(), nE = g.epsilon.size(),
                    nT = static_cast<std::size_t>(config.trials);
  // Row index in output order N, sigma_w, p, eta, epsilon, trial.
  auto row_index = [&](std::size_t iN, std::size_t iS, std::size_t iP, std::size_t iH,
                       std::size_t iE, std::size_t iT) {
    return ((((iN * nS + iS) * nP + iP) * nH + iH) * nE + iE) * nT + iT;
  };
  std::vector<SweepRow> rows(nN * nS * nP * nH * nE * nT);

  // One job per generated dataset: (N, sigma_w, trial).
  const std::size_t jobs_total = nN * nS * nT;
  auto run_job = [&](std::size_t job) {
    const std::size_t iT = job % nT;
    const std::size_t iS = (job / nT) % nS;
    const std::size_t iN = job / (nT * nS);
    const int N = g.samples[iN];
    const double sigma_w = g.sigma_w[iS];
    const std::uint64_t seed = config.base_seed + iT;

    for (std::size_t iP = 0; iP < nP; ++iP)
      for (std::size_t iH = 0; iH < nH; ++iH)
        for (std::size_t iE = 0; iE < nE; ++iE) {
          SweepRow& r = rows[row_index(iN, iS, iP, iH, iE, iT)];
          r.trial = static_cast<int>(iT);
          r.seed = seed;
          r.samples = N;
          r.sigma_w = sigma_w;
          r.p = g.p[iP];
          r.eta = g.eta[iH];
          r.epsilon = g.epsilon[iE];
        }

    std::optional<Dataset> data;
    std::optional<SignalMatrix> test;
    try {
      data = make_dataset(config.graph, N, sigma_w, seed);
      if (config.test_samples > 0) {
        test = add_noise(sample_smooth_signals(data->groundtruth, config.test_samples, seed,
                                               streams::kTestSignals),
                         sigma_w, seed, streams::kTestNoise);
      }
    } catch (const std::exception& e) {
      for (std::size_t iP = 0; iP < nP; ++iP)
        for (std::size_t iH = 0; iH < nH; ++iH)
          for (std::size_t iE = 0; iE < nE; ++iE)
            rows[row_index(iN, iS, iP, iH, iE, iT)].error = e.what();
      return;
    }

    for (std::size_t iP = 0; iP < nP; ++iP) {
      for (std::size_t iH = 0; iH < nH; ++iH) {
        for (std::size_t iE = 0; iE < nE; ++iE) {
          SweepRow& r = rows[row_index(iN, iS, iP, iH, iE, iT)];
          try {
            SolverSettings s{config.solver, r.epsilon, r.eta, config.beta, qnorm_dual(r.p)};
            const auto t0 = std::chrono::steady_clock::now();
            LearnOutcome out = learn_graph(data->signals, s);
            const auto t1 = std::chrono::steady_clock::now();
            const Laplacian pruned = prune_edges(out.laplacian, config.edge_threshold);
            r.mcc = mcc(pruned, data->groundtruth, config.edge_threshold);
            r.dog = dog(pruned, data->groundtruth);
            if (test) {
              r.reliability = reliability(*test, out.laplacian, r.eta, out.record.worst_case_risk);
            }
            r.objective = out.record.worst_case_risk;
            r.converged = out.record.converged;
            if (options.timing) {
              r.runtime_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            }
          } catch (const std::exception& e) {
            r.error = e.what();
          }
        }
      }
    }
  };

  const int workers = std::max(1, std::min<int>(options.jobs, static_cast<int>(jobs_total)));
  if (workers == 1) {
    for (std::size_t job = 0; job < jobs_total; ++job) run_job(job);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t job = next++; job < jobs_total; job = next++) run_job(job);
      });
    }
  }
  return rows;
}

namespace {

std::string csv_field(std::string s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '\n') ch = ' ';
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

std::string opt(const std::optional<double>& x) { return x ? io::format_double(*x) : ""; }

}  // namespace

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  using io::format_double;
  std::string out =
      "trial,seed,N,sigma_w,p,eta,epsilon,mcc,dog,reliability,objective,runtime_ms,converged,"
      "error\n";
  for (const SweepRow& r : rows) {
    const bool ok = r.error.empty();
    out += std::to_string(r.trial) + ',' + std::to_string(r.seed) + ',' +
           std::to_string(r.samples) + ',' + format_double(r.sigma_w) + ',' + format_double(r.p) +
           ',' + format_double(r.eta) + ',' + format_double(r.epsilon) + ',';
    if (ok) {
      out += format_double(r.mcc) + ',' + format_double(r.dog) + ',' + opt(r.reliability) + ',' +
             format_double(r.objective) + ',' + format_double(r.runtime_ms) + ',' +
             (r.converged ? "true" : "false") + ',';
    } else {
      out += ",,,,,false," + csv_field(r.error);
    }
    out += '\n';
  }
  return out;
}

std::vector<SweepSummary> summarize(const std::vector<SweepRow>& rows) {
  using Key = std::tuple<int, double, double, double, double>;
  std::vector<SweepSummary> out;
  std::map<Key, std::size_t> where;
  std::vector<int> with_reliability;
  for (const SweepRow& r : rows) {
    const Key key{r.samples, r.sigma_w, r.p, r.eta, r.epsilon};
    auto it = where.find(key);
    if (it == where.end()) {
      it = where.emplace(key, out.size()).first;
      SweepSummary s;
      s.samples = r.samples;
      s.sigma_w = r.sigma_w;
      s.p = r.p;
      s.eta = r.eta;
      s.epsilon = r.epsilon;
      out.push_back(s);
      with_reliability.push_back(0);
    }
    if (!r.error.empty()) continue;
    SweepSummary& s = out[it->second];
    ++s.trials;
    s.mean_mcc += r.mcc;
    s.mean_dog += r.dog;
    s.mean_objective += r.objective;
    if (r.reliability) {
      s.mean_reliability = s.mean_reliability.value_or(0.0) + *r.reliability;
      ++with_reliability[it->second];
    }
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    SweepSummary& s = out[k];
    if (s.trials == 0) continue;
    s.mean_mcc /= s.trials;
    s.mean_dog /= s.trials;
    s.mean_objective /= s.trials;
    if (s.mean_reliability) *s.mean_reliability /= with_reliability[k];
  }
  return out;
}

std::vector<SweepSummary> best_epsilon(const std::vector<SweepSummary>& summary) {
  using Key = std::tuple<int, double, double, double>;
  std::vector<SweepSummary> out;
  std::map<Key, std::size_t> where;
  for (const SweepSummary& s : summary) {
    if (s.trials == 0) continue;
    const Key key{s.samples, s.sigma_w, s.p, s.eta};
    auto it = where.find(key);
    if (it == where.end()) {
      where.emplace(key, out.size());
      out.push_back(s);
    } else if (s.mean_mcc > out[it->second].mean_mcc) {
      out[it->second] = s;
    }
  }
  return out;
}

std::string summary_csv(const std::vector<SweepSummary>& summary) {
  using io::format_double;
  std::string out = "N,sigma_w,p,eta,epsilon,trials,mean_mcc,mean_dog,mean_reliability,mean_objective\n";
  for (const SweepSummary& s : summary) {
    out += std::to_string(s.samples) + ',' + format_double(s.sigma_w) + ',' + format_double(s.p) +
           ',' + format_double(s.eta) + ',' + format_double(s.epsilon) + ',' +
           std::to_string(s.trials) + ',' + format_double(s.mean_mcc) + ',' +
           format_double(s.mean_dog) + ',' + opt(s.mean_reliability) + ',' +
           format_double(s.mean_objective) + '\n';
  }
  return out;
}

std::vector<ReliabilityPoint> reliability_curve(const SignalMatrix& train, const SignalMatrix& test,
                                                const SolverSettings& base,
                                                const std::vector<double>& epsilons) {
  if (train.cols() == 0) throw std::invalid_argument("training split is empty");
  if (test.cols() == 0) throw std::invalid_argument("test split is empty");
  if (test.rows() != train.rows()) throw std::invalid_argument("test and training dimensions differ");
  if (epsilons.empty()) throw std::invalid_argument("epsilon grid is empty");
  std::vector<ReliabilityPoint> out;
  for (double eps : epsilons) {
    SolverSettings s = base;
    s.epsilon = eps;
    LearnOutcome res = learn_graph(train, s);
    out.push_back({res.record.epsilon,
                   reliability(test, res.laplacian, s.eta, res.record.worst_case_risk),
                   res.record.worst_case_risk, res.record.converged});
  }
  return out;
}

std::string reliability_csv(const std::vector<ReliabilityPoint>& points) {
  using io::format_double;
  std::string out = "epsilon,reliability,worst_case_risk,converged\n";
  for (const ReliabilityPoint& p : points) {
    out += format_double(p.epsilon) + ',' + format_double(p.reliability) + ',' +
           format_double(p.worst_case_risk) + ',' + (p.converged ? "true" : "false") + '\n';
  }
  return out;
}

int resolve_jobs(int requested) {
  if (const char* env = std::getenv("WDRO_JOBS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min(v, 1024L));
  }
  return std::max(1, requested);
}

}  // namespace wrgl
