#include "gpdc/depmeasures.hpp"
#include "gpdc/errors.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gpdc {
namespace {

using testing::for_all;
using testing::gaussian;
using testing::uniform;

Mat column(std::initializer_list<double> v) {
  Mat m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

Mat random_sample(Rng& rng, Eigen::Index m, Eigen::Index p) {
  Mat x(m, p);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) x(i, j) = gaussian(rng);
  }
  return x;
}

// V² through the uncentred expansion S1 + S2 − 2·S3 rather than double centring.
double brute_dcov2(const Mat& x, const Mat& y, double alpha) {
  const Eigen::Index m = x.rows();
  auto dist = [&](const Mat& s, Eigen::Index i, Eigen::Index j) {
    return std::pow((s.row(i) - s.row(j)).norm(), alpha);
  };
  double s1 = 0.0, sa = 0.0, sb = 0.0, s3 = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double a = dist(x, i, j);
      const double b = dist(y, i, j);
      s1 += a * b;
      sa += a;
      sb += b;
      for (Eigen::Index k = 0; k < m; ++k) s3 += a * dist(y, i, k);
    }
  }
  const double md = static_cast<double>(m);
  return s1 / (md * md) + (sa / (md * md)) * (sb / (md * md)) - 2.0 * s3 / (md * md * md);
}

TEST(DistCov, HandComputedThreePointValue) {
  // |i − j| over {0,1,2}: V² = 40/81.
  const Mat x = column({0.0, 1.0, 2.0});
  EXPECT_NEAR(dist_cov(x, x), 0.70272836892630660404, 1e-15);
  const CenteredDistances c(x, 1.0);
  EXPECT_NEAR(dist_cov_squared(c, c), 40.0 / 81.0, 1e-15);
  EXPECT_NEAR(brute_dcov2(x, x, 1.0), 40.0 / 81.0, 1e-15);
}

TEST(DistCov, TwoSamplesReduceToProductOfGaps) {
  // Centring [[0, d], [d, 0]] gives ±d/2, so V² = d_x·d_y / 4 and dCor = 1.
  const Mat x = column({0.3, -1.2});
  const Mat y = column({5.0, 2.0});
  EXPECT_NEAR(dist_cov(x, y), std::sqrt(1.5 * 3.0 / 4.0), 1e-15);
  EXPECT_NEAR(dist_cor(x, y), 1.0, 1e-15);
}

TEST(DistCov, ConstantVariableGivesExactlyZero) {
  EXPECT_EQ(dist_cov(column({0.1, 0.7, 0.3, 0.9}), column({2.0, 2.0, 2.0, 2.0})), 0.0);
}

TEST(DistCov, MatchesBruteForceOracle) {
  for (double alpha : {0.5, 1.0, 1.5}) {
    for_all(12, 70, [alpha](Rng& rng, int i) {
      const Eigen::Index m = 2 + static_cast<Eigen::Index>(uniform_index(rng, 63));
      const Mat x = random_sample(rng, m, 1 + i % 3);
      Mat y = random_sample(rng, m, 1 + (i / 3) % 2);
      y.col(0) += 0.7 * x.col(0).array().square().matrix();
      const DepConfig cfg{alpha};
      const double want = brute_dcov2(x, y, alpha);
      const double got = dist_cov(x, y, cfg);
      EXPECT_NEAR(got * got, want, 1e-10 * std::max(1.0, std::abs(want))) << "alpha " << alpha;
      const double cor = want / std::sqrt(brute_dcov2(x, x, alpha) * brute_dcov2(y, y, alpha));
      EXPECT_NEAR(dist_cor(x, y, cfg), std::sqrt(std::max(cor, 0.0)), 1e-10) << "alpha " << alpha;
    });
  }
}

TEST(DistCov, Symmetric) {
  for_all(10, 71, [](Rng& rng, int) {
    const Mat x = random_sample(rng, 30, 2);
    const Mat y = random_sample(rng, 30, 1);
    EXPECT_EQ(dist_cov(x, y), dist_cov(y, x));
  });
}

TEST(DistCov, RejectsBadShapes) {
  EXPECT_THROW(static_cast<void>(dist_cov(column({1.0, 2.0}), column({1.0, 2.0, 3.0}))), InvalidArgument);
  EXPECT_THROW(static_cast<void>(dist_cov(column({1.0}), column({1.0}))), InvalidArgument);
  EXPECT_THROW(static_cast<void>(dist_cor(column({1.0, 2.0}), column({1.0, 3.0}), DepConfig{2.0})),
               InvalidArgument);
}

TEST(DistCor, SelfCorrelationIsOne) {
  for_all(10, 72, [](Rng& rng, int i) {
    const Mat x = random_sample(rng, 3 + i * 7, 1 + i % 3);
    EXPECT_NEAR(dist_cor(x, x), 1.0, 1e-12);
  });
}

TEST(DistCor, DegenerateVariableGivesZero) {
  EXPECT_EQ(dist_cor(column({0.1, 0.7, 0.3}), column({4.0, 4.0, 4.0})), 0.0);
}

TEST(DistCor, StaysInUnitInterval) {
  for (double alpha : {0.5, 1.0, 1.5}) {
    for_all(30, 73, [alpha](Rng& rng, int) {
      const Eigen::Index m = 3 + static_cast<Eigen::Index>(uniform_index(rng, 60));
      const double v = dist_cor(random_sample(rng, m, 2), random_sample(rng, m, 1), DepConfig{alpha});
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    });
  }
}

TEST(DistCor, InvariantUnderScalingTranslationAndRotation) {
  for_all(15, 74, [](Rng& rng, int) {
    const Mat x = random_sample(rng, 40, 2);
    Mat y = random_sample(rng, 40, 1);
    y.col(0) += x.col(0).array().sin().matrix();
    const double base = dist_cor(x, y);

    const double c = uniform(rng, 0.1, 10.0);
    Mat xs = c * x;
    xs.rowwise() += Eigen::RowVector2d(uniform(rng, -5.0, 5.0), uniform(rng, -5.0, 5.0));
    const Mat ys = (uniform(rng, 0.1, 10.0) * y).array() + uniform(rng, -5.0, 5.0);
    EXPECT_NEAR(dist_cor(xs, ys), base, 1e-10 * base);

    const double th = uniform(rng, 0.0, 6.28);
    Eigen::Matrix2d rot;
    rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    EXPECT_NEAR(dist_cor(x * rot.transpose(), y), base, 1e-10 * base);
  });
}

TEST(DistCor, PositiveScalingKeepsCandidateArgmax) {
  for_all(10, 75, [](Rng& rng, int) {
    const Mat y = random_sample(rng, 50, 1);
    std::vector<Mat> candidates;
    for (int j = 0; j < 6; ++j) {
      Mat c = random_sample(rng, 50, 1);
      c.col(0) += uniform(rng, 0.0, 2.0) * y.col(0);
      candidates.push_back(c);
    }
    auto best = [&](const Mat& target) {
      std::vector<double> s;
      for (const auto& c : candidates) s.push_back(dist_cor(c, target));
      return std::max_element(s.begin(), s.end()) - s.begin();
    };
    EXPECT_EQ(best(y), best(3.7 * y));
  });
}

TEST(DistCor, IndependenceNullAtTwoHundredSamples) {
  int passed = 0;
  for (int seed = 0; seed < 20; ++seed) {
    Rng rng = make_rng(900 + static_cast<std::uint64_t>(seed));
    Vec x(200), y(200);
    for (Eigen::Index i = 0; i < 200; ++i) x[i] = uniform01(rng);
    for (Eigen::Index i = 0; i < 200; ++i) y[i] = uniform01(rng);
    const CenteredDistances cx(x, 1.0);
    const double stat = dist_cor(cx, CenteredDistances(y, 1.0));
    std::vector<double> null;
    std::vector<Eigen::Index> perm(200);
    std::iota(perm.begin(), perm.end(), 0);
    for (int p = 0; p < 500; ++p) {
      std::shuffle(perm.begin(), perm.end(), rng);
      Vec yp(200);
      for (Eigen::Index i = 0; i < 200; ++i) yp[i] = y[perm[static_cast<std::size_t>(i)]];
      null.push_back(dist_cor(cx, CenteredDistances(yp, 1.0)));
    }
    std::sort(null.begin(), null.end());
    if (stat < null[494]) ++passed;
  }
  EXPECT_EQ(passed, 20);
}

TEST(DistCor, DetectsNonlinearDependence) {
  Rng rng = make_rng(76);
  Vec x(200), y(200);
  for (Eigen::Index i = 0; i < 200; ++i) {
    x[i] = uniform(rng, -1.0, 1.0);
    y[i] = x[i] * x[i] + 0.05 * gaussian(rng);
  }
  EXPECT_GT(dist_cor(CenteredDistances(x, 1.0), CenteredDistances(y, 1.0)), 0.3);
}

TEST(MutualInformation, IndependentSamplesNearZero) {
  std::vector<double> values;
  for (int seed = 0; seed < 15; ++seed) {
    Rng rng = make_rng(80 + static_cast<std::uint64_t>(seed));
    Vec x(300), y(300);
    for (Eigen::Index i = 0; i < 300; ++i) x[i] = gaussian(rng);
    std::vector<Eigen::Index> perm(300);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (Eigen::Index i = 0; i < 300; ++i) y[i] = x[perm[static_cast<std::size_t>(i)]];
    values.push_back(mi_knn(x, y));
  }
  std::nth_element(values.begin(), values.begin() + 7, values.end());
  EXPECT_LE(values[7], 0.1);
}

TEST(MutualInformation, NoisyCopyIsLarge) {
  Rng rng = make_rng(81);
  Vec x(300), y(300), z(300);
  for (Eigen::Index i = 0; i < 300; ++i) {
    x[i] = gaussian(rng);
    y[i] = x[i] + 0.1 * gaussian(rng);
    z[i] = gaussian(rng);
  }
  const double dependent = mi_knn(x, y);
  EXPECT_GE(dependent - mi_knn(x, z), 1.0);
  // I = ½ log(1 + 1/0.01) for the Gaussian pair.
  EXPECT_NEAR(dependent, 0.5 * std::log(101.0), 0.35);
}

TEST(MutualInformation, BoundaryNeighbourCount) {
  const Vec x = Eigen::Vector3d(0.1, 0.5, 0.2);
  const Vec y = Eigen::Vector3d(1.0, -1.0, 0.3);
  const double v = mi_knn(x, y, 2);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_GE(v, 0.0);
  EXPECT_THROW(static_cast<void>(mi_knn(x, y, 3)), InvalidArgument);
}

TEST(MutualInformation, DeterministicAndInvariantToScale) {
  Rng rng = make_rng(82);
  Vec x(100), y(100);
  for (Eigen::Index i = 0; i < 100; ++i) {
    x[i] = gaussian(rng);
    y[i] = std::tanh(x[i]) + 0.3 * gaussian(rng);
  }
  EXPECT_EQ(mi_knn(x, y), mi_knn(x, y));
  EXPECT_NEAR(mi_knn(x, y), mi_knn(40.0 * x, 0.01 * y), 1e-6);
}

}  // namespace
}  // namespace gpdc
