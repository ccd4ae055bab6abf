#include "gpdc/errors.hpp"
#include "gpdc/harness.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace gpdc {
namespace {

using testing::for_all;
using testing::uniform;

TEST(Metrics, RSquaredValues) {
  const std::vector<double> truth{1.0, 2.0, 3.0};
  EXPECT_DOUBLE_EQ(compute_r2(truth, truth), 1.0);
  // SS_res = 3, SS_tot = 2.
  const std::vector<double> pred{2.0, 3.0, 2.0};
  EXPECT_DOUBLE_EQ(compute_r2(pred, truth), -0.5);
  const std::vector<double> flat{2.0, 2.0, 2.0};
  EXPECT_DOUBLE_EQ(compute_r2(flat, truth), 0.0);
  EXPECT_THROW(static_cast<void>(compute_r2(truth, flat)), UndefinedMetric);
  EXPECT_THROW(static_cast<void>(compute_r2(std::vector<double>{1.0}, std::vector<double>{1.0})), InvalidArgument);
  EXPECT_THROW(static_cast<void>(compute_r2(pred, std::vector<double>{1.0, 2.0})), InvalidArgument);
}

TEST(Metrics, RegretIsRunningGap) {
  EXPECT_EQ(compute_regret(5.0, std::vector<double>{1.0, 3.0, 2.0}), (std::vector<double>{4.0, 2.0, 2.0}));
  for_all(20, 400, [](Rng& rng, int) {
    std::vector<double> ys(30);
    for (double& y : ys) y = uniform(rng, -1.0, 1.0);
    const auto r = compute_regret(1.5, ys);
    for (std::size_t i = 1; i < r.size(); ++i) EXPECT_LE(r[i], r[i - 1]);
    EXPECT_DOUBLE_EQ(r.back(), 1.5 - *std::max_element(ys.begin(), ys.end()));
  });
}

TEST(Metrics, CumulativeRegretMatchesLoop) {
  for_all(20, 401, [](Rng& rng, int) {
    std::vector<double> r(50);
    for (double& v : r) v = uniform(rng, 0.0, 2.0);
    const int from = 1 + static_cast<int>(uniform_index(rng, 50));
    const int to = from + static_cast<int>(uniform_index(rng, 60));
    double want = 0.0;
    for (int t = from; t <= std::min(to, 50); ++t) want += r[static_cast<std::size_t>(t - 1)];
    EXPECT_NEAR(cumulative_regret(r, from, to), want, 1e-12);
  });
}

TEST(Metrics, PercentileMatchesSortedInterpolation) {
  for_all(10, 402, [](Rng& rng, int) {
    std::vector<double> v(64);
    for (double& x : v) x = uniform(rng, -10.0, 10.0);
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (double p : {0.0, 10.0, 25.0, 50.0, 75.0, 99.0, 100.0}) {
      const double pos = p / 100.0 * 63.0;
      const auto lo = static_cast<std::size_t>(std::floor(pos));
      const auto hi = std::min<std::size_t>(lo + 1, 63);
      const double want = sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
      EXPECT_NEAR(percentile(v, p), want, 1e-12) << p;
    }
  });
  EXPECT_DOUBLE_EQ(percentile({1.0, 2.0, 3.0, 4.0}, 50.0), 2.5);
}

std::vector<RunRecord> synthetic_records() {
  std::vector<RunRecord> out;
  const double base[] = {1.0, 2.0, 3.0};
  for (const char* policy : {"GP-DC", "Random"}) {
    const double scale = std::string(policy) == "Random" ? 2.0 : 1.0;
    for (int rep = 0; rep < 3; ++rep) {
      for (int step = 1; step <= 4; ++step) {
        RunRecord r;
        r.replica = rep;
        r.step = step;
        r.policy = policy;
        r.location = {0.1 * step};
        r.metric = scale * base[rep];
        out.push_back(r);
      }
    }
  }
  return out;
}

TEST(Summaries, MedianAndQuartilesOverReplicas) {
  const auto s = summarize(synthetic_records(), SummaryOptions{2, 3, std::nullopt});
  ASSERT_EQ(s.size(), 2u);
  const auto& dc = s[0].policy == "GP-DC" ? s[0] : s[1];
  // Per replica the sum over steps 2..3 is 2·{1, 2, 3}.
  EXPECT_DOUBLE_EQ(dc.median, 4.0);
  EXPECT_DOUBLE_EQ(dc.p25, 3.0);
  EXPECT_DOUBLE_EQ(dc.p75, 5.0);
  EXPECT_EQ(dc.replicas, 3u);
}

TEST(Summaries, NormalizationMakesReferenceMedianOne) {
  const auto s = summarize(synthetic_records(), SummaryOptions{1, 4, std::string("Random")});
  for (const auto& p : s) {
    if (p.policy == "Random") EXPECT_DOUBLE_EQ(p.median, 1.0);
    if (p.policy == "GP-DC") EXPECT_DOUBLE_EQ(p.median, 0.5);
  }
}

TEST(Summaries, MeanMetricByStep) {
  const auto m = mean_metric_by_step(synthetic_records());
  ASSERT_EQ(m.at("Random").size(), 4u);
  EXPECT_DOUBLE_EQ(m.at("Random")[2], 4.0);
  EXPECT_DOUBLE_EQ(m.at("GP-DC")[0], 2.0);
}

TEST(Csv, RoundTripIsExact) {
  Rng rng = make_rng(403);
  std::vector<RunRecord> records;
  for (int i = 0; i < 40; ++i) {
    RunRecord r;
    r.replica = i % 5;
    r.step = i;
    r.policy = i % 2 ? "GP-DC" : "VarMax@0.175";
    r.kind = i % 3 ? OperatorKind::IntervalMean : OperatorKind::DiskMean;
    r.location = {uniform(rng, 0.0, 1.0), uniform(rng, 0.0, 1.0) * 1e-7};
    r.width = uniform(rng, 0.0, 0.7);
    r.y = uniform(rng, -1.0, 1.0) * 1e12;
    r.metric = -std::exp(uniform(rng, -30.0, 3.0));
    records.push_back(r);
  }
  std::stringstream s;
  write_csv(s, records);
  EXPECT_EQ(s.str().substr(0, s.str().find('\n')), kCsvHeader);
  EXPECT_EQ(read_csv(s), records);
}

TEST(Csv, RejectsMalformedRows) {
  std::istringstream bad_kind(std::string(kCsvHeader) + "\n0,1,GP-DC,Cube,0.5,0,1,1,0\n");
  EXPECT_THROW(static_cast<void>(read_csv(bad_kind)), FormatError);
  std::istringstream short_row(std::string(kCsvHeader) + "\n0,1,GP-DC\n");
  EXPECT_THROW(static_cast<void>(read_csv(short_row)), Error);
}

TEST(Config, ParsesKeysAndFillsDefaults) {
  std::istringstream in(
      "# comment\n"
      "task = gradient-1d\n"
      "policies = GP-DC, VarMax@0.2 , Random\n"
      "steps = 5   # trailing comment\n"
      "seed = 42\n"
      "timing = yes\n");
  const auto cfg = parse_config(in);
  EXPECT_EQ(cfg.task, Task::Gradient1D);
  EXPECT_EQ(cfg.policies, (std::vector<std::string>{"GP-DC", "VarMax@0.2", "Random"}));
  EXPECT_EQ(cfg.steps, 5);
  EXPECT_EQ(cfg.seed, 42u);
  EXPECT_TRUE(cfg.timing);
  EXPECT_EQ(cfg.grid_size, 120u);
  EXPECT_EQ(cfg.widths.size(), 9u);
}

TEST(Config, ErrorsNameTheLine) {
  auto fails = [](const std::string& text, const std::string& fragment) {
    std::istringstream in(text);
    try {
      static_cast<void>(parse_config(in));
      ADD_FAILURE() << "accepted: " << text;
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
    }
  };
  fails("policies = GP-DC\ncolour = blue\n", "line 2");
  fails("policies = GP-DC\nsteps = many\n", "line 2");
  fails("policies = GP-DC\njust words\n", "line 2");
  fails("task = spline\n", "unknown task");
  fails("task = max-search-1d\npolicies = GP-DC\n", "policy");
  fails("policies = GP-DC\nalpha = 2\n", "alpha");
  fails("policies = GP-DC\nbenchmark = ackley\n", "benchmark");
  fails("task = gradient-1d\npolicies = GP-DC\nwidths = 0, 0.1\n", "gradient");
  fails("", "policy");
}

TEST(Config, TaskNamesRoundTrip) {
  for (Task t : {Task::Estimation1D, Task::Gradient1D, Task::Elevation2D, Task::MaxSearch1D,
                 Task::MaxSearchBenchmark}) {
    EXPECT_EQ(task_from_string(to_string(t)), t);
  }
  EXPECT_TRUE(is_estimation_task(Task::Elevation2D));
  EXPECT_FALSE(is_estimation_task(Task::MaxSearch1D));
}

ExperimentConfig small_config(Task task, std::vector<std::string> policies) {
  ExperimentConfig cfg;
  cfg.task = task;
  cfg.policies = std::move(policies);
  cfg.steps = 3;
  cfg.replicas = 2;
  cfg.draws = 20;
  cfg.seed = 11;
  cfg.hyper_budget = 4;
  cfg.mes_samples = 10;
  if (task == Task::Estimation1D) cfg.grid_size = 40;
  if (task == Task::Elevation2D) {
    cfg.grid_size = 30;
    cfg.candidates = 10;
  }
  if (task == Task::MaxSearchBenchmark) cfg.grid_size = 10;
  cfg.apply_defaults();
  cfg.validate();
  return cfg;
}

std::string as_csv(const std::vector<RunRecord>& records) {
  std::ostringstream s;
  write_csv(s, records);
  return s.str();
}

TEST(RunExperiment, ByteIdenticalAcrossRuns) {
  for (const auto& cfg : {small_config(Task::Estimation1D, {"GP-DC", "VarMax", "Random"}),
                          small_config(Task::MaxSearch1D, {"GP-dCor", "EI", "MES"}),
                          small_config(Task::MaxSearchBenchmark, {"GP-UCB", "Random"})}) {
    const auto a = run_experiment(cfg);
    const auto b = run_experiment(cfg);
    EXPECT_TRUE(a.failures.empty()) << to_string(cfg.task);
    EXPECT_EQ(as_csv(a.records), as_csv(b.records)) << to_string(cfg.task);
  }
}

TEST(RunExperiment, RecordLayout) {
  const auto cfg = small_config(Task::Estimation1D, {"GP-DC", "Random"});
  const auto res = run_experiment(cfg);
  // Two initial observations, then one record per step.
  ASSERT_EQ(res.records.size(), 2u * 2u * 5u);
  for (std::size_t i = 0; i < res.records.size(); ++i) {
    const auto& r = res.records[i];
    EXPECT_EQ(r.policy, i < 10 ? "GP-DC" : "Random");
    EXPECT_EQ(r.replica, static_cast<int>((i / 5) % 2));
    EXPECT_EQ(r.step, static_cast<int>(i % 5) + 1);
    EXPECT_EQ(r.ms, 0.0);
    EXPECT_TRUE(std::isfinite(r.metric));
    EXPECT_LE(r.metric, 1.0);
  }
}

TEST(RunExperiment, ReplicasShareTruthAcrossPolicies) {
  const auto cfg = small_config(Task::MaxSearch1D, {"Random", "VarMax"});
  const auto res = run_experiment(cfg);
  // The two initial queries depend only on the replica seed.
  for (int rep = 0; rep < 2; ++rep) {
    std::vector<const RunRecord*> first;
    for (const auto& r : res.records) {
      if (r.replica == rep && r.step == 1) first.push_back(&r);
    }
    ASSERT_EQ(first.size(), 2u);
    EXPECT_EQ(first[0]->location, first[1]->location);
    EXPECT_EQ(first[0]->y, first[1]->y);
  }
}

TEST(RunExperiment, RegretIsNonnegativeAndNonincreasing) {
  const auto cfg = small_config(Task::MaxSearchBenchmark, {"EI", "GP-dCor"});
  const auto res = run_experiment(cfg);
  for (std::size_t i = 1; i < res.records.size(); ++i) {
    const auto& a = res.records[i - 1];
    const auto& b = res.records[i];
    EXPECT_GE(b.metric, 0.0);
    if (a.policy == b.policy && a.replica == b.replica) EXPECT_LE(b.metric, a.metric);
  }
}

TEST(RunExperiment, ElevationFromGridFile) {
  const auto path = std::filesystem::temp_directory_path() / "gpdc_test_grid.txt";
  save_elevation_grid(path.string(), synthetic_surface(16, 5));
  auto cfg = small_config(Task::Elevation2D, {"GP-DC"});
  cfg.grid_file = path.string();
  cfg.replicas = 1;
  const auto res = run_experiment(cfg);
  std::filesystem::remove(path);
  ASSERT_TRUE(res.failures.empty()) << res.failures.front();
  ASSERT_EQ(res.records.size(), 5u);
  EXPECT_EQ(res.records.back().kind, OperatorKind::DiskMean);
}

TEST(RunExperiment, WritesCsvWhenAsked) {
  const auto path = std::filesystem::temp_directory_path() / "gpdc_test_run.csv";
  auto cfg = small_config(Task::Estimation1D, {"Random"});
  cfg.output = path.string();
  const auto res = run_experiment(cfg);
  EXPECT_EQ(read_csv_file(path.string()), res.records);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace gpdc
