#pragma once

#include "gpdc/geometry.hpp"
#include "gpdc/random.hpp"

namespace gpdc {

struct DepConfig {
  double alpha = 1.0;  ///< exponent on pairwise distances, 0 < alpha < 2
  int knn_k = 3;       ///< neighbours for the mutual-information estimator

  void validate() const;
};

/// Double-centred |X_i − X_j|^α matrix of one sample together with its distance variance.
/// Computing it once lets one variable be scored against many others.
class CenteredDistances {
 public:
  /// Rows of `samples` are observations (M×p).
  CenteredDistances(const Mat& samples, double alpha);
  /// Convenience for a single column.
  CenteredDistances(const Vec& samples, double alpha);

  [[nodiscard]] Eigen::Index count() const noexcept { return centered_.rows(); }
  [[nodiscard]] const Mat& matrix() const noexcept { return centered_; }
  /// V²(X, X).
  [[nodiscard]] double self_v2() const noexcept { return self_v2_; }

 private:
  Mat centered_;
  double self_v2_ = 0.0;
};

/// V²(X, Y): grand mean of the elementwise product of the centred matrices.
double dist_cov_squared(const CenteredDistances& x, const CenteredDistances& y);
double dist_cov(const CenteredDistances& x, const CenteredDistances& y);
double dist_cor(const CenteredDistances& x, const CenteredDistances& y);

/// Distance covariance V(X, Y) (the square root of the V-statistic, clamped at 0).
/// X is M×p, Y is M×q. Throws InvalidArgument on row mismatch or M < 2.
double dist_cov(const Mat& x, const Mat& y, const DepConfig& cfg = {});

/// Distance correlation in [0, 1]; 0 when either variable is degenerate.
double dist_cor(const Mat& x, const Mat& y, const DepConfig& cfg = {});

/// Kraskov–Stögbauer–Grassberger (first variant) estimate of I(X;Y) in nats, clamped at 0.
/// Both samples are scaled to unit standard deviation and dithered by 1e-10-scale noise drawn
/// from `rng` before the neighbour search. Throws InvalidArgument when M ≤ k.
double mi_knn(const Vec& x, const Vec& y, int k, Rng& rng);
/// Same with a fixed dithering stream.
double mi_knn(const Vec& x, const Vec& y, int k = 3);

}  // namespace gpdc
