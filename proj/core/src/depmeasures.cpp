#include "gpdc/depmeasures.hpp"

#include "gpdc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace gpdc {

void DepConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 2.0)) throw InvalidArgument("alpha must lie in (0, 2)");
  if (knn_k < 1) throw InvalidArgument("knn_k must be >= 1");
}

CenteredDistances::CenteredDistances(const Mat& samples, double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw InvalidArgument("alpha must lie in (0, 2)");
  const Eigen::Index m = samples.rows();
  if (m < 2) throw InvalidArgument("distance statistics need at least 2 samples");
  if (!samples.allFinite()) throw InvalidArgument("samples must be finite");
  centered_.resize(m, m);
  const bool unit = alpha == 1.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    centered_(i, i) = 0.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double r = (samples.row(i) - samples.row(j)).norm();
      const double v = unit ? r : std::pow(r, alpha);
      centered_(i, j) = v;
      centered_(j, i) = v;
    }
  }
  const Vec row_mean = centered_.rowwise().mean();
  const double grand = row_mean.mean();
  centered_.colwise() -= row_mean;
  centered_.rowwise() -= row_mean.transpose();
  centered_.array() += grand;
  self_v2_ = std::max(centered_.squaredNorm() / static_cast<double>(m * m), 0.0);
}

CenteredDistances::CenteredDistances(const Vec& samples, double alpha)
    : CenteredDistances(Mat(samples), alpha) {}

double dist_cov_squared(const CenteredDistances& x, const CenteredDistances& y) {
  if (x.count() != y.count()) throw InvalidArgument("samples have different lengths");
  const double m = static_cast<double>(x.count());
  return x.matrix().cwiseProduct(y.matrix()).sum() / (m * m);
}

double dist_cov(const CenteredDistances& x, const CenteredDistances& y) {
  return std::sqrt(std::max(dist_cov_squared(x, y), 0.0));
}

double dist_cor(const CenteredDistances& x, const CenteredDistances& y) {
  const double denom = x.self_v2() * y.self_v2();
  if (!(denom > 0.0)) return 0.0;
  const double vx = std::sqrt(x.self_v2());
  const double vy = std::sqrt(y.self_v2());
  const double scale_x = x.matrix().cwiseAbs().maxCoeff();
  const double scale_y = y.matrix().cwiseAbs().maxCoeff();
  // A constant sample leaves only rounding noise in its centred matrix.
  if (vx <= 1e-13 * scale_x || vy <= 1e-13 * scale_y) return 0.0;
  const double r = dist_cov(x, y) / std::sqrt(vx * vy);
  return std::clamp(r, 0.0, 1.0);
}

double dist_cov(const Mat& x, const Mat& y, const DepConfig& cfg) {
  cfg.validate();
  if (x.rows() != y.rows()) throw InvalidArgument("samples have different lengths");
  return dist_cov(CenteredDistances(x, cfg.alpha), CenteredDistances(y, cfg.alpha));
}

double dist_cor(const Mat& x, const Mat& y, const DepConfig& cfg) {
  cfg.validate();
  if (x.rows() != y.rows()) throw InvalidArgument("samples have different lengths");
  return dist_cor(CenteredDistances(x, cfg.alpha), CenteredDistances(y, cfg.alpha));
}

namespace {

double digamma_int(int n) {
  constexpr double euler_gamma = 0.57721566490153286061;
  double h = 0.0;
  for (int i = 1; i < n; ++i) h += 1.0 / i;
  return h - euler_gamma;
}

std::vector<double> standardize(const Vec& v, Rng& rng) {
  const double mean = v.mean();
  const double sd = std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size()));
  const double scale = sd > 0.0 ? sd : 1.0;
  std::normal_distribution<double> dither(0.0, 1e-10);
  std::vector<double> out(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out[static_cast<std::size_t>(i)] = (v[i] - mean) / scale + dither(rng);
  }
  return out;
}

}  // namespace

double mi_knn(const Vec& x, const Vec& y, int k, Rng& rng) {
  if (x.size() != y.size()) throw InvalidArgument("samples have different lengths");
  if (k < 1) throw InvalidArgument("k must be >= 1");
  const auto m = static_cast<int>(x.size());
  if (m <= k) throw InvalidArgument("mutual information needs more samples than neighbours");
  if (!x.allFinite() || !y.allFinite()) throw InvalidArgument("samples must be finite");
  const auto xs = standardize(x, rng);
  const auto ys = standardize(y, rng);

  std::vector<double> dist(static_cast<std::size_t>(m));
  double acc = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      dist[static_cast<std::size_t>(j)] =
          std::max(std::abs(xs[i] - xs[j]), std::abs(ys[i] - ys[j]));
    }
    dist[static_cast<std::size_t>(i)] = std::numeric_limits<double>::infinity();
    std::nth_element(dist.begin(), dist.begin() + (k - 1), dist.end());
    const double eps = dist[static_cast<std::size_t>(k - 1)];
    int nx = 0;
    int ny = 0;
    for (int j = 0; j < m; ++j) {
      if (j == i) continue;
      if (std::abs(xs[i] - xs[j]) < eps) ++nx;
      if (std::abs(ys[i] - ys[j]) < eps) ++ny;
    }
    acc += digamma_int(nx + 1) + digamma_int(ny + 1);
  }
  const double mi = digamma_int(m) + digamma_int(k) - acc / m;
  return std::max(mi, 0.0);
}

double mi_knn(const Vec& x, const Vec& y, int k) {
  Rng rng = make_rng(0x6d69u);
  return mi_knn(x, y, k, rng);
}

}  // namespace gpdc
