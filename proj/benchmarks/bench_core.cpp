#include "gpdc/depmeasures.hpp"
#include "gpdc/gp.hpp"
#include "gpdc/policies.hpp"
#include "gpdc/problems.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace gpdc;

void BM_IntervalCrossCovClosedForm(benchmark::State& state) {
  const KernelSpec k = KernelSpec::matern52(0.1);
  const auto a = ObservationOperator::interval_mean(0.3, 0.2);
  const auto b = ObservationOperator::interval_mean(0.55, 0.35);
  const Domain d = Domain::unit(1);
  for (auto _ : state) benchmark::DoNotOptimize(operator_cross_cov(k, a, b, d));
}
BENCHMARK(BM_IntervalCrossCovClosedForm);

void BM_DiskCrossCov(benchmark::State& state) {
  const KernelSpec k = KernelSpec::matern52(0.1);
  const auto a = ObservationOperator::disk_mean(0.3, 0.4, 0.15);
  const auto b = ObservationOperator::disk_mean(0.5, 0.45, 0.2);
  const Domain d = Domain::unit(2);
  for (auto _ : state) benchmark::DoNotOptimize(operator_cross_cov(k, a, b, d));
}
BENCHMARK(BM_DiskCrossCov);

void BM_DistCor(benchmark::State& state) {
  const auto m = static_cast<Eigen::Index>(state.range(0));
  const auto n = static_cast<Eigen::Index>(state.range(1));
  Rng rng = make_rng(1);
  std::normal_distribution<double> g;
  Mat x(m, n), y(m, 1);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) x(i, j) = g(rng);
    y(i, 0) = x(i, 0) + g(rng);
  }
  const CenteredDistances cx(x, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(dist_cor(cx, CenteredDistances(y, 1.0)));
}
BENCHMARK(BM_DistCor)->Args({200, 120})->Args({300, 900});

void BM_CenteredDistances(benchmark::State& state) {
  const auto m = static_cast<Eigen::Index>(state.range(0));
  const auto n = static_cast<Eigen::Index>(state.range(1));
  Rng rng = make_rng(2);
  std::normal_distribution<double> g;
  Mat x(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) x(i, j) = g(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(CenteredDistances(x, 1.0));
}
BENCHMARK(BM_CenteredDistances)->Args({200, 120})->Args({300, 900});

void BM_SamplePosterior(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  GPModel m;
  m.kernel = KernelSpec::matern52(0.05);
  Dataset d{Domain::unit(1), {}};
  for (double q : {0.1, 0.4, 0.7}) d.add(ObservationOperator::interval_mean(q, 0.1), q);
  const Posterior p = fit_posterior(m, d, Grid::uniform(n));
  Rng rng = make_rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(sample_posterior(p, 200, rng));
}
BENCHMARK(BM_SamplePosterior)->Arg(120)->Arg(400);

void BM_EstimationStep(benchmark::State& state) {
  const Curve f = gen_random_function(4);
  EstimationConfig cfg;
  cfg.widths = {0, 0.0875, 0.175, 0.2625, 0.35, 0.4375, 0.525, 0.6125, 0.7};
  cfg.grid = Grid::uniform(120);
  Dataset d{cfg.domain, {}};
  Rng rng = make_rng(5);
  for (int i = 0; i < static_cast<int>(state.range(0)); ++i) {
    const double q = uniform01(rng);
    d.add(ObservationOperator::interval_mean(q, 0.1), true_interval_mean(f, q, 0.1));
  }
  GPModel model;
  model.kernel = KernelSpec::matern52(1.0);
  for (auto _ : state) {
    AcquisitionState st(make_rng(6));
    benchmark::DoNotOptimize(estimation_step(model, d, cfg, st));
  }
}
BENCHMARK(BM_EstimationStep)->Arg(5)->Arg(30)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
