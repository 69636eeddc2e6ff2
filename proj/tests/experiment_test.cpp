#include <cstdlib>

#include <gtest/gtest.h>

#include "wrgl/experiment.hpp"
#include "wrgl/general_solver.hpp"

namespace wrgl {
namespace {

TEST(SolverKind, Parse) {
  EXPECT_EQ(parse_solver("saa"), SolverKind::saa);
  EXPECT_EQ(parse_solver("wdro-gaussian"), SolverKind::wdro_gaussian);
  EXPECT_EQ(parse_solver("wdro-general"), SolverKind::wdro_general);
  EXPECT_EQ(to_string(SolverKind::wdro_general), "wdro-general");
  EXPECT_THROW(parse_solver("sdp"), std::invalid_argument);
}

TEST(LearnGraph, ZeroRadiusGeneralMatchesSaa) {
  const Dataset ds = make_rbf_dataset({12, 0.5, 0.7, 60, 0.1, 4});
  const LearnOutcome saa = learn_graph(ds.signals, {SolverKind::saa, 0.7, 0.05, std::nullopt, 2.0});
  const LearnOutcome gen =
      learn_graph(ds.signals, {SolverKind::wdro_general, 0.0, 0.05, std::nullopt, 2.0});
  EXPECT_EQ(saa.laplacian.matrix(), gen.laplacian.matrix());
  EXPECT_EQ(saa.record.epsilon, 0.0);
  EXPECT_FALSE(saa.record.gamma);

  const LearnOutcome gauss =
      learn_graph(ds.signals, {SolverKind::wdro_gaussian, 0.2, 0.05, std::nullopt, 2.0});
  ASSERT_TRUE(gauss.record.gamma);
  EXPECT_GT(*gauss.record.gamma, max_eigenvalue(gauss.laplacian));
  EXPECT_EQ(gauss.record.beta, 6.0);
}

TEST(GenerateSpec, ParsesAndValidates) {
  const GenerateSpec rbf = generate_spec_from_json(
      R"({"model":"rbf","d":20,"sigma":0.5,"tau":0.7,"N":100,"noise_sigma":0.1,"seed":3})");
  EXPECT_EQ(rbf.graph.d, 20);
  EXPECT_EQ(rbf.samples, 100);
  const io::Bundle b = generate_bundle(rbf);
  EXPECT_EQ(b.signals.rows(), 20);
  EXPECT_EQ(b.signals.cols(), 100);

  const GenerateSpec sbm = generate_spec_from_json(
      R"({"model":"sbm","cluster_sizes":[15,15,15],"p_in":0.3,"p_out":0.02,"N":10})");
  EXPECT_EQ(generate_bundle(sbm).labels->size(), 45u);

  EXPECT_THROW(generate_spec_from_json(R"({"model":"er"})"), io::FormatError);
  EXPECT_THROW(generate_spec_from_json(R"({"model":"rbf","N":0})"), io::FormatError);
  EXPECT_THROW(generate_spec_from_json(R"({"model":"rbf","d":"x"})"), io::FormatError);
  EXPECT_THROW(generate_spec_from_json(R"({"model":"rbf","sigma":-1})"), io::FormatError);
  EXPECT_THROW(generate_spec_from_json("[1,2"), io::FormatError);
}

TEST(ExperimentConfig, GridFallbacks) {
  const ExperimentConfig scalars = config_from_json(
      R"({"solver":"wdro-general","epsilon":0.2,"eta":0.05,"q":"inf","N":80,"sigma_w":0.3})");
  EXPECT_EQ(scalars.grids.epsilon, std::vector<double>{0.2});
  EXPECT_EQ(scalars.grids.eta, std::vector<double>{0.05});
  EXPECT_EQ(scalars.grids.p, std::vector<double>{1.0});
  EXPECT_EQ(scalars.grids.samples, std::vector<int>{80});
  EXPECT_EQ(scalars.grids.sigma_w, std::vector<double>{0.3});

  const ExperimentConfig defaults = config_from_json("{}");
  const SweepGrids g = default_grids();
  EXPECT_EQ(defaults.grids.samples, g.samples);
  EXPECT_EQ(defaults.grids.p.size(), 7u);
  EXPECT_TRUE(std::isinf(defaults.grids.p.back()));
  EXPECT_EQ(defaults.trials, 20);

  const ExperimentConfig grids = config_from_json(
      R"({"solver":"saa","epsilon":0.5,"grids":{"epsilon":[0,0.1],"N":[50,100],"p":[1,"inf"]},"trials":2,"base_seed":9,"out_dir":"x"})");
  EXPECT_EQ(grids.grids.epsilon, (std::vector<double>{0.0, 0.1}));
  EXPECT_EQ(grids.base_seed, 9u);
  EXPECT_EQ(grids.out_dir, "x");
}

TEST(ExperimentConfig, Rejections) {
  EXPECT_THROW(config_from_json(R"({"trials":0})"), io::FormatError);
  EXPECT_THROW(config_from_json(R"({"grids":{"epsilon":[]}})"), io::FormatError);
  EXPECT_THROW(config_from_json(R"({"solver":"wdro-gaussian","grids":{"epsilon":[0,0.1]}})"),
               io::FormatError);
  EXPECT_THROW(config_from_json(R"({"solver":"nope"})"), io::FormatError);
  EXPECT_THROW(config_from_json(R"({"grids":{"p":[0.5]}})"), io::FormatError);
  EXPECT_THROW(config_from_json(R"({"grids":{"N":[0]}})"), io::FormatError);
  EXPECT_THROW(config_from_json(R"({"graph":{"model":"rbf","d":1}})"), io::FormatError);
  EXPECT_THROW(config_from_json("{"), io::FormatError);
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.solver = SolverKind::wdro_general;
  c.graph.d = 8;
  c.grids.epsilon = {0.0, 0.2};
  c.grids.samples = {30, 60};
  c.grids.sigma_w = {0.1};
  c.grids.p = {2.0};
  c.grids.eta = {0.05};
  c.trials = 3;
  c.base_seed = 11;
  c.test_samples = 50;
  return c;
}

TEST(RunSweep, RowOrderAndSeeds) {
  const std::vector<SweepRow> rows = run_sweep(small_config(), {});
  ASSERT_EQ(rows.size(), 2u * 2u * 3u);
  EXPECT_EQ(rows[0].samples, 30);
  EXPECT_EQ(rows[0].epsilon, 0.0);
  EXPECT_EQ(rows[0].trial, 0);
  EXPECT_EQ(rows[1].trial, 1);
  EXPECT_EQ(rows[3].epsilon, 0.2);
  EXPECT_EQ(rows[6].samples, 60);
  for (const SweepRow& r : rows) {
    EXPECT_TRUE(r.error.empty()) << r.error;
    EXPECT_EQ(r.seed, 11u + static_cast<std::uint64_t>(r.trial));
    EXPECT_TRUE(r.reliability.has_value());
    EXPECT_EQ(r.runtime_ms, 0.0);
  }
}

TEST(RunSweep, ParallelOutputIsIdentical) {
  const std::string serial = sweep_csv(run_sweep(small_config(), {1, false}));
  const std::string parallel = sweep_csv(run_sweep(small_config(), {3, false}));
  EXPECT_EQ(serial, parallel);
  EXPECT_EQ(serial.substr(0, serial.find('\n')),
            "trial,seed,N,sigma_w,p,eta,epsilon,mcc,dog,reliability,objective,runtime_ms,converged,"
            "error");
}

TEST(RunSweep, TimingFillsRuntime) {
  ExperimentConfig c = small_config();
  c.trials = 1;
  for (const SweepRow& r : run_sweep(c, {1, true})) EXPECT_GT(r.runtime_ms, 0.0);
}

TEST(RunSweep, SaaCollapsesRadiusGrid) {
  ExperimentConfig c = small_config();
  c.solver = SolverKind::saa;
  c.grids.p = {1.0, 2.0};
  const std::vector<SweepRow> rows = run_sweep(c, {});
  EXPECT_EQ(rows.size(), 2u * 3u);
  for (const SweepRow& r : rows) EXPECT_EQ(r.epsilon, 0.0);
}

TEST(RunSweep, FailuresAreRecordedPerRow) {
  ExperimentConfig c = small_config();
  c.graph.model = "sbm";
  c.graph.cluster_sizes = {4, 4};
  c.graph.p_in = 0.1;
  c.graph.p_out = 0.5;  // rejected by the block model generator
  const std::vector<SweepRow> rows = run_sweep(c, {});
  for (const SweepRow& r : rows) EXPECT_FALSE(r.error.empty());
  const std::string csv = sweep_csv(rows);
  EXPECT_NE(csv.find(",,,,,false,"), std::string::npos);
}

TEST(Summaries, MeansAndBestEpsilon) {
  std::vector<SweepRow> rows;
  auto add = [&](int n, double eps, int trial, double m) {
    SweepRow r;
    r.samples = n;
    r.epsilon = eps;
    r.trial = trial;
    r.mcc = m;
    r.reliability = m / 2;
    rows.push_back(r);
  };
  add(50, 0.1, 0, 0.2);
  add(50, 0.1, 1, 0.4);
  add(50, 0.2, 0, 0.5);
  add(50, 0.2, 1, 0.7);
  add(100, 0.1, 0, 0.9);
  add(100, 0.2, 0, 0.8);
  SweepRow failed;
  failed.samples = 100;
  failed.epsilon = 0.2;
  failed.trial = 1;
  failed.error = "boom";
  rows.push_back(failed);

  const std::vector<SweepSummary> s = summarize(rows);
  ASSERT_EQ(s.size(), 4u);
  EXPECT_NEAR(s[0].mean_mcc, 0.3, 1e-15);
  EXPECT_NEAR(*s[0].mean_reliability, 0.15, 1e-15);
  EXPECT_EQ(s[3].trials, 1);
  const std::vector<SweepSummary> best = best_epsilon(s);
  ASSERT_EQ(best.size(), 2u);
  EXPECT_EQ(best[0].epsilon, 0.2);
  EXPECT_EQ(best[1].epsilon, 0.1);
  EXPECT_NE(summary_csv(best).find("N,sigma_w,p,eta,epsilon,trials,mean_mcc"), std::string::npos);
}

TEST(ReliabilityCurve, ShapeAndErrors) {
  const Dataset ds = make_rbf_dataset({10, 0.5, 0.7, 300, 0.1, 2});
  const SignalMatrix train = ds.signals.leftCols(100);
  const SignalMatrix test = ds.signals.rightCols(200);
  const SolverSettings base{SolverKind::wdro_general, 0.0, 0.05, std::nullopt, 2.0};
  const auto curve = reliability_curve(train, test, base, {0.0, 0.5, 2.0});
  ASSERT_EQ(curve.size(), 3u);
  EXPECT_LE(curve[0].reliability, curve[2].reliability);
  EXPECT_GE(curve[2].reliability, 0.95);
  EXPECT_EQ(reliability_csv(curve).substr(0, 38), "epsilon,reliability,worst_case_risk,co");
  EXPECT_THROW(reliability_curve(train, Matrix(10, 0), base, {0.1}), std::invalid_argument);
  EXPECT_THROW(reliability_curve(Matrix(10, 0), test, base, {0.1}), std::invalid_argument);
}

TEST(ResolveJobs, EnvironmentOverrides) {
  unsetenv("WDRO_JOBS");
  EXPECT_EQ(resolve_jobs(3), 3);
  EXPECT_EQ(resolve_jobs(0), 1);
  setenv("WDRO_JOBS", "5", 1);
  EXPECT_EQ(resolve_jobs(3), 5);
  setenv("WDRO_JOBS", "junk", 1);
  EXPECT_EQ(resolve_jobs(3), 3);
  unsetenv("WDRO_JOBS");
}

}  // namespace
}  // namespace wrgl
