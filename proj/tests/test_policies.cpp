#include "gpdc/errors.hpp"
#include "gpdc/policies.hpp"
#include "gpdc/problems.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

namespace gpdc {
namespace {

using testing::for_all;
using testing::gaussian;
using testing::uniform;

EstimationConfig interval_config(std::vector<double> widths, std::size_t n = 60) {
  EstimationConfig cfg;
  cfg.widths = std::move(widths);
  cfg.grid = Grid::uniform(n);
  cfg.draws = 100;
  return cfg;
}

Dataset observe_curve(const Curve& f, std::initializer_list<std::pair<double, double>> qw) {
  Dataset d{Domain::unit(1), {}};
  for (const auto& [q, w] : qw) d.add(ObservationOperator::interval_mean(q, w), true_interval_mean(f, q, w));
  return d;
}

Dataset point_data(Rng& rng, int n) {
  Dataset d{Domain::unit(1), {}};
  for (int i = 0; i < n; ++i) {
    const double x = uniform(rng, 0.0, 1.0);
    d.add(ObservationOperator::point({x}), std::sin(9.0 * x) + 0.05 * gaussian(rng));
  }
  return d;
}

bool is_argmax(const std::vector<double>& s, std::size_t i) {
  return s[i] >= *std::max_element(s.begin(), s.end()) * (1.0 - 1e-12) - 1e-300;
}

TEST(EstimationConfig, ValidationRejectsBadSettings) {
  EstimationConfig cfg = interval_config({0.1});
  EXPECT_NO_THROW(cfg.validate());
  cfg.widths.clear();
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = interval_config({-0.1});
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = interval_config({0.1});
  cfg.draws = 1;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = interval_config({0.1});
  cfg.alpha = 2.0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = interval_config({0.0, 0.1});
  cfg.operator_kind = OperatorKind::SmoothedGradient;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
}

TEST(EstimationStep, SingleWidthIsMaxVarianceSelection) {
  for_all(5, 200, [](Rng& rng, int) {
    const Curve f = gen_random_function(rng());
    const Dataset d = observe_curve(f, {{0.2, 0.1}, {0.7, 0.3}});
    EstimationConfig cfg = interval_config({0.15});
    cfg.refit = false;
    GPModel m;
    AcquisitionState a(make_rng(7)), b(make_rng(7));
    const EstimationChoice dc = estimation_step(m, d, cfg, a);
    const EstimationChoice mv = max_variance_step(m, d, cfg, 0.15, b);
    EXPECT_EQ(dc.op, mv.op);
    EXPECT_EQ(dc.width_index, 0u);
  });
}

TEST(EstimationStep, DegenerateDrawsPickWidthAtRandom) {
  std::vector<WidthCandidates> per_width(3);
  for (std::size_t j = 0; j < 3; ++j) {
    per_width[j].width = 0.1 * static_cast<double>(j + 1);
    per_width[j].ops = {ObservationOperator::interval_mean(0.5, per_width[j].width)};
    per_width[j].variances = {1.0};
  }
  const Grid grid = Grid::uniform(60);
  const SampleMatrix draws{Mat::Constant(50, 60, 0.3)};
  std::set<std::size_t> seen;
  for (std::uint64_t s = 0; s < 40; ++s) {
    Rng rng = make_rng(s);
    const EstimationChoice c = choose_estimation_query(per_width, draws, grid, Domain::unit(1), {}, 1.0, rng);
    for (double v : c.dc_list) EXPECT_EQ(v, 0.0);
    seen.insert(c.width_index);
  }
  EXPECT_EQ(seen.size(), 3u);
}

TEST(EstimationStep, ScoresAreDistanceCorrelations) {
  const Curve f = gen_random_function(3);
  const Dataset d = observe_curve(f, {{0.3, 0.2}, {0.8, 0.0}});
  EstimationConfig cfg = interval_config({0.0, 0.1, 0.3, 0.6});
  AcquisitionState st(make_rng(4));
  const EstimationChoice c = estimation_step(GPModel{}, d, cfg, st);
  ASSERT_EQ(c.dc_list.size(), 4u);
  for (double v : c.dc_list) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  EXPECT_TRUE(is_argmax(c.dc_list, c.width_index));
  EXPECT_EQ(c.op.width, cfg.widths[c.width_index]);
}

TEST(EstimationStep, DeterministicGivenSeed) {
  const Curve f = gen_random_function(5);
  const Dataset d = observe_curve(f, {{0.1, 0.4}, {0.6, 0.05}, {0.9, 0.2}});
  const EstimationConfig cfg = interval_config({0.0, 0.2, 0.4});
  AcquisitionState a(make_rng(11)), b(make_rng(11));
  EXPECT_EQ(estimation_step(GPModel{}, d, cfg, a).op, estimation_step(GPModel{}, d, cfg, b).op);
}

TEST(EstimationStep, PrefersBroadWidthEarly) {
  int broad = 0;
  for (int seed = 0; seed < 20; ++seed) {
    const Curve f = gen_random_function(1000 + static_cast<std::uint64_t>(seed));
    EstimationConfig cfg = interval_config({0.0, 0.35}, 120);
    cfg.draws = 200;
    Dataset d{Domain::unit(1), {}};
    Rng rng = make_rng(static_cast<std::uint64_t>(seed), 1);
    for (int i = 0; i < 3; ++i) {
      const double q = uniform01(rng);
      const double w = uniform01(rng) < 0.5 ? 0.0 : 0.35;
      d.add(ObservationOperator::interval_mean(q, w), true_interval_mean(f, q, w));
    }
    GPModel m;
    m.kernel = KernelSpec::matern52(1.0);
    AcquisitionState st(make_rng(static_cast<std::uint64_t>(seed), 2));
    if (estimation_step(m, d, cfg, st).op.width > 0.3) ++broad;
  }
  EXPECT_GE(broad, 14);
}

TEST(EstimationStep, DiskCandidatesComeFromSubset) {
  EstimationConfig cfg;
  cfg.widths = {0.0, 0.2};
  cfg.operator_kind = OperatorKind::DiskMean;
  cfg.grid = Grid::mesh(8);
  cfg.domain = Domain::unit(2, Extension::Reflect);
  cfg.draws = 30;
  cfg.candidate_subset = 10;
  cfg.refit = false;
  Dataset d{cfg.domain, {}};
  d.add(ObservationOperator::disk_mean(0.3, 0.4, 0.1), 0.2);
  GPModel m;
  m.kernel = KernelSpec::matern52(0.3);
  m.quadrature.disk_degree = 6;
  ConditionedGP gp(m, d);
  Rng rng = make_rng(9);
  const auto per_width = estimation_candidates(gp, cfg, rng);
  ASSERT_EQ(per_width.size(), 2u);
  for (const auto& wc : per_width) {
    EXPECT_EQ(wc.ops.size(), 10u);
    for (const auto& op : wc.ops) EXPECT_EQ(op.kind, OperatorKind::DiskMean);
  }
}

TEST(RandomEstimationQuery, StaysInsideMenuAndDomain) {
  const EstimationConfig cfg = interval_config({0.0, 0.1, 0.5});
  Rng rng = make_rng(12);
  std::set<double> widths;
  for (int i = 0; i < 200; ++i) {
    const auto op = random_estimation_query(cfg, rng);
    EXPECT_GE(op.location[0], 0.0);
    EXPECT_LE(op.location[0], 1.0);
    widths.insert(op.width);
  }
  EXPECT_EQ(widths, (std::set<double>{0.0, 0.1, 0.5}));
}

TEST(MaxPolicyNames, RoundTrip) {
  for (auto k : {MaxPolicyKind::GPdCor, MaxPolicyKind::GPdCov, MaxPolicyKind::GPdCorX, MaxPolicyKind::GPdCovX,
                 MaxPolicyKind::GPMIS, MaxPolicyKind::Random, MaxPolicyKind::VarMax, MaxPolicyKind::PI,
                 MaxPolicyKind::EI, MaxPolicyKind::GPUCB, MaxPolicyKind::GPMI, MaxPolicyKind::MES}) {
    EXPECT_EQ(max_policy_from_string(to_string(k)), k);
  }
  EXPECT_THROW(static_cast<void>(max_policy_from_string("GP-Foo")), InvalidArgument);
}

TEST(AnalyticScores, ThreePointGridMatchesOracle) {
  const Vec mu = Eigen::Vector3d(0.0, 1.0, 0.5);
  const Vec sd = Eigen::Vector3d(1.0, 0.5, 2.0);
  AcquisitionState st;
  st.incumbent_best = 0.9;
  st.step = 1;
  const MaxPolicyConstants c;
  const auto pi = analytic_scores(MaxPolicyKind::PI, mu, sd, st, c, 1);
  const auto ei = analytic_scores(MaxPolicyKind::EI, mu, sd, st, c, 1);
  const auto ucb = analytic_scores(MaxPolicyKind::GPUCB, mu, sd, st, c, 1);
  const double want_pi[] = {0.18379415984362737, 0.57847746813476321, 0.42054477899779685};
  const double want_ei[] = {0.10043113708667128, 0.25344731793163824, 0.61378927172655297};
  const double want_ucb[] = {2.8936412205332857, 2.4468206102666428, 6.2872824410665714};
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(pi[i], want_pi[i], 1e-14);
    EXPECT_NEAR(ei[i], want_ei[i], 1e-14);
    EXPECT_NEAR(ucb[i], want_ucb[i], 1e-13);
  }
  Rng rng = make_rng(1);
  EXPECT_EQ(argmax_random_tie(pi, rng), 1u);
  EXPECT_EQ(argmax_random_tie(ei, rng), 2u);
  EXPECT_EQ(argmax_random_tie(ucb, rng), 2u);
}

TEST(AnalyticScores, ImprovementRulesRespectIncumbent) {
  Vec mu = Vec::Zero(5), sd = Vec::Ones(5);
  mu[0] = 2.0;
  sd[0] = 0.0;
  const MaxPolicyConstants c;
  Rng rng = make_rng(2);
  for (auto kind : {MaxPolicyKind::PI, MaxPolicyKind::EI}) {
    AcquisitionState st;
    st.incumbent_best = 1.0;
    EXPECT_EQ(argmax_random_tie(analytic_scores(kind, mu, sd, st, c, 1), rng), 0u);
    st.incumbent_best = 3.0;
    EXPECT_NE(argmax_random_tie(analytic_scores(kind, mu, sd, st, c, 1), rng), 0u);
  }
  AcquisitionState st;
  const auto var = analytic_scores(MaxPolicyKind::VarMax, mu, sd, st, c, 1);
  for (int i = 0; i < 20; ++i) EXPECT_NE(argmax_random_tie(var, rng), 0u);
}

TEST(SamplingScores, IdenticalDrawsScoreZero) {
  const Grid grid = Grid::uniform(15);
  const SampleMatrix draws{Mat::Constant(40, 15, 1.5)};
  Rng rng = make_rng(3);
  for (auto kind : {MaxPolicyKind::GPdCor, MaxPolicyKind::GPdCov, MaxPolicyKind::GPdCorX}) {
    for (double s : sampling_scores(kind, draws, grid, MaxPolicyConstants{}, rng)) EXPECT_EQ(s, 0.0);
  }
}

TEST(SamplingScores, DistanceCorrelationsInUnitInterval) {
  GPModel m;
  m.kernel = KernelSpec::matern52(0.15);
  Rng rng = make_rng(4);
  const Dataset d = point_data(rng, 5);
  const Grid grid = Grid::uniform(40);
  const SampleMatrix draws = sample_posterior(fit_posterior(m, d, grid), 100, rng);
  for (auto kind : {MaxPolicyKind::GPdCor, MaxPolicyKind::GPdCorX}) {
    const auto s = sampling_scores(kind, draws, grid, MaxPolicyConstants{}, rng);
    ASSERT_EQ(s.size(), 40u);
    for (double v : s) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(MaxSearchStep, VarMaxOnEmptyPriorIsUniform) {
  const Grid grid = Grid::uniform(6);
  Dataset d{Domain::unit(1), {}};
  MaxPolicy p{MaxPolicyKind::VarMax, {}};
  int counts[6] = {};
  for (std::uint64_t s = 0; s < 600; ++s) {
    AcquisitionState st(make_rng(s));
    ++counts[max_search_step(GPModel{}, d, p, grid, st).index];
  }
  for (int c : counts) EXPECT_NEAR(c, 100, 40);
}

TEST(MaxSearchStep, EveryPolicyPicksAnArgmaxInsideTheGrid) {
  const Grid grid = Grid::uniform(30);
  for (auto kind : {MaxPolicyKind::GPdCor, MaxPolicyKind::GPdCov, MaxPolicyKind::GPdCorX, MaxPolicyKind::GPdCovX,
                    MaxPolicyKind::GPMIS, MaxPolicyKind::Random, MaxPolicyKind::VarMax, MaxPolicyKind::PI,
                    MaxPolicyKind::EI, MaxPolicyKind::GPUCB, MaxPolicyKind::GPMI, MaxPolicyKind::MES}) {
    SCOPED_TRACE(to_string(kind));
    Rng rng = make_rng(5);
    const Dataset d = point_data(rng, 6);
    MaxPolicy p{kind, {}};
    p.constants.draws = 60;
    p.constants.mes_samples = 20;
    AcquisitionState st(make_rng(6));
    for (const auto& r : d.records) st.record_observation(r.y);
    st.step = 7;
    const MaxChoice c = max_search_step(GPModel{}, d, p, grid, st);
    ASSERT_LT(c.index, grid.size());
    if (kind != MaxPolicyKind::Random) {
      ASSERT_EQ(c.scores.size(), grid.size());
      EXPECT_TRUE(is_argmax(c.scores, c.index));
    }
  }
}

TEST(MaxSearchStep, SamplingPoliciesAreDeterministic) {
  const Grid grid = Grid::uniform(25);
  Rng rng = make_rng(7);
  const Dataset d = point_data(rng, 5);
  for (auto kind : {MaxPolicyKind::GPdCor, MaxPolicyKind::GPdCovX, MaxPolicyKind::GPMIS}) {
    MaxPolicy p{kind, {}};
    p.constants.draws = 50;
    AcquisitionState a(make_rng(8)), b(make_rng(8));
    const MaxChoice ca = max_search_step(GPModel{}, d, p, grid, a);
    const MaxChoice cb = max_search_step(GPModel{}, d, p, grid, b);
    EXPECT_EQ(ca.index, cb.index);
    EXPECT_EQ(ca.scores, cb.scores);
  }
}

TEST(MaxSearchStep, MutualInformationGammaNeverDecreases) {
  const Grid grid = Grid::uniform(40);
  Rng rng = make_rng(9);
  Dataset d = point_data(rng, 2);
  MaxPolicy p{MaxPolicyKind::GPMI, {}};
  AcquisitionState st(make_rng(10));
  GPModel m;
  double prev = st.gamma_hat;
  for (int t = 0; t < 8; ++t) {
    st.step = static_cast<int>(d.size()) + 1;
    const MaxChoice c = max_search_step(m, d, p, grid, st);
    m = c.model;
    EXPECT_GE(st.gamma_hat, prev);
    EXPECT_NEAR(st.gamma_hat - prev, std::max(c.chosen_variance, 0.0), 1e-15);
    prev = st.gamma_hat;
    const double x = grid.point(c.index)[0];
    d.add(ObservationOperator::point({x}), std::sin(9.0 * x));
  }
  EXPECT_GT(st.gamma_hat, 0.0);
}

TEST(AcquisitionState, GammaIgnoresNegativeVariance) {
  AcquisitionState st;
  st.update_gamma(0.5);
  st.update_gamma(-1.0);
  EXPECT_EQ(st.gamma_hat, 0.5);
}

TEST(FitModel, UsesEmpiricalMeanOfValueObservations) {
  Dataset d{Domain::unit(1), {}};
  d.add(ObservationOperator::point({0.1}), 2.0);
  d.add(ObservationOperator::interval_mean(0.5, 0.2), 4.0);
  d.add(ObservationOperator::smoothed_gradient(0.7, 0.05), 100.0);
  EXPECT_EQ(with_empirical_mean(GPModel{}, d).prior_mean, 3.0);
  const GPModel fitted = fit_model(GPModel{}, d, 5);
  EXPECT_EQ(fitted.prior_mean, 3.0);
}

}  // namespace
}  // namespace gpdc
