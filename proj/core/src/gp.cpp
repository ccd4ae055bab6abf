#include "gpdc/gp.hpp"

#include "gpdc/errors.hpp"
#include "gpdc/normal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace gpdc {

void Dataset::add(ObservationOperator op, double y) { records.push_back({std::move(op), y}); }

void Dataset::validate() const {
  domain.validate();
  for (const auto& r : records) {
    r.op.validate(domain);
    if (!std::isfinite(r.y)) throw InvalidArgument("observation value must be finite");
  }
}

void GPModel::validate() const {
  kernel.validate();
  if (!(noise_variance >= 0.0)) throw InvalidArgument("noise variance must be nonnegative");
  if (!(jitter > 0.0)) throw InvalidArgument("jitter must be positive");
  quadrature.validate();
}

Vec Posterior::stddev() const { return cov.diagonal().cwiseMax(0.0).cwiseSqrt(); }

// ---------------------------------------------------------------------------

Mat robust_cholesky(const Mat& matrix, double relative_jitter) {
  const Eigen::Index n = matrix.rows();
  if (n == 0) return Mat(0, 0);
  const double max_diag = matrix.diagonal().maxCoeff();
  double jitter = relative_jitter * std::max(max_diag, std::numeric_limits<double>::min());
  for (int attempt = 0; attempt < 4; ++attempt) {
    Mat shifted = matrix;
    shifted.diagonal().array() += jitter;
    Eigen::LLT<Mat> llt(shifted);
    if (llt.info() == Eigen::Success) {
      Mat l = llt.matrixL();
      if (l.allFinite() && l.diagonal().minCoeff() > 0.0) return l;
    }
    jitter *= 10.0;
  }
  Eigen::LDLT<Mat> ldlt(matrix);
  const Vec d = ldlt.vectorD().cwiseAbs();
  const double cond = d.minCoeff() > 0.0 ? d.maxCoeff() / d.minCoeff()
                                         : std::numeric_limits<double>::infinity();
  throw NumericalFailure("Cholesky factorization failed after jitter escalation", cond);
}

namespace {

// Functional-size product above which covariance lookups go through the cache.
constexpr std::size_t kCacheThreshold = 256;

// 1-D pairs go through operator_cross_cov, which resolves the kernel's kink; 2-D pairs reuse
// the precomputed disk functionals.
double cov_between(const GPModel& model, const Domain& domain, const ObservationOperator& a,
                   const WeightedNodes& fa, const ObservationOperator& b, const WeightedNodes& fb,
                   CovarianceCache* cache) {
  if (has_closed_form_cov(model.kernel, a, b)) {
    return operator_cross_cov(model.kernel, a, b, domain, model.quadrature);
  }
  if (cache != nullptr && (domain.dim() == 1 || fa.size() * fb.size() >= kCacheThreshold)) {
    return cache->cross_cov(model.kernel, a, b, domain, model.quadrature);
  }
  if (domain.dim() == 1) return operator_cross_cov(model.kernel, a, b, domain, model.quadrature);
  return functional_cov(model.kernel, fa, fb);
}

Mat data_gram(const GPModel& model, const Dataset& data, const std::vector<WeightedNodes>& fs,
              CovarianceCache* cache) {
  const auto n = static_cast<Eigen::Index>(data.size());
  Mat k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = cov_between(model, data.domain, data.records[i].op, fs[i],
                                   data.records[j].op, fs[j], cache);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

Vec centered_targets(const GPModel& model, const Dataset& data) {
  Vec y(static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    y[static_cast<Eigen::Index>(i)] =
        data.records[i].y - model.prior_mean * data.records[i].op.unit_response();
  }
  return y;
}

// Weighted-node functionals of the data operators (2-D only; 1-D covariances do not use them).
std::vector<WeightedNodes> data_functionals(const GPModel& model, const Dataset& data) {
  std::vector<WeightedNodes> fs(data.size());
  if (data.domain.dim() == 1) return fs;
  for (std::size_t i = 0; i < data.size(); ++i) {
    fs[i] = to_functional(data.records[i].op, data.domain, model.quadrature);
  }
  return fs;
}

}  // namespace

ConditionedGP::ConditionedGP(GPModel model, Dataset data, CovarianceCache* cache)
    : model_(std::move(model)), data_(std::move(data)), cache_(cache) {
  model_.validate();
  data_.validate();
  functionals_ = data_functionals(model_, data_);
  if (data_.empty()) return;
  Mat k = data_gram(model_, data_, functionals_, cache_);
  k.diagonal().array() += model_.noise_variance;
  chol_ = robust_cholesky(k, model_.jitter);
  const Vec y = centered_targets(model_, data_);
  alpha_ = chol_.triangularView<Eigen::Lower>().solve(y);
  chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(alpha_);
}

double ConditionedGP::prior_cov(const ObservationOperator& a, const ObservationOperator& b) const {
  if (cache_ != nullptr && !has_closed_form_cov(model_.kernel, a, b)) {
    return cache_->cross_cov(model_.kernel, a, b, data_.domain, model_.quadrature);
  }
  return operator_cross_cov(model_.kernel, a, b, data_.domain, model_.quadrature);
}

Vec ConditionedGP::data_cross(const ObservationOperator& op) const {
  const WeightedNodes f =
      data_.domain.dim() == 1 ? WeightedNodes{} : to_functional(op, data_.domain, model_.quadrature);
  Vec k(static_cast<Eigen::Index>(data_.size()));
  for (std::size_t i = 0; i < data_.size(); ++i) {
    k[static_cast<Eigen::Index>(i)] =
        cov_between(model_, data_.domain, op, f, data_.records[i].op, functionals_[i], cache_);
  }
  return k;
}

Vec ConditionedGP::data_cross_point(std::span<const double> x) const {
  Vec k(static_cast<Eigen::Index>(data_.size()));
  if (data_.domain.dim() == 1) {
    const auto p = ObservationOperator::point({x[0]});
    for (std::size_t i = 0; i < data_.size(); ++i) {
      k[static_cast<Eigen::Index>(i)] =
          operator_cross_cov(model_.kernel, p, data_.records[i].op, data_.domain, model_.quadrature);
    }
    return k;
  }
  WeightedNodes f;
  f.dim = static_cast<int>(x.size());
  f.add(x, 1.0);
  for (std::size_t i = 0; i < data_.size(); ++i) {
    k[static_cast<Eigen::Index>(i)] = functional_cov(model_.kernel, f, functionals_[i]);
  }
  return k;
}

double ConditionedGP::mean(const ObservationOperator& op) const {
  double m = model_.prior_mean * op.unit_response();
  if (data_.empty()) return m;
  return m + data_cross(op).dot(alpha_);
}

double ConditionedGP::variance(const ObservationOperator& op) const {
  const double prior = prior_cov(op, op);
  if (data_.empty()) return std::max(prior, 0.0);
  const Vec v = chol_.triangularView<Eigen::Lower>().solve(data_cross(op));
  return std::max(prior - v.squaredNorm(), 0.0);
}

std::vector<double> ConditionedGP::variances(std::span<const ObservationOperator> ops) const {
  std::vector<double> out;
  out.reserve(ops.size());
  for (const auto& op : ops) out.push_back(variance(op));
  return out;
}

Posterior ConditionedGP::posterior(const Grid& grid) const {
  const auto n = static_cast<Eigen::Index>(grid.size());
  const int d = grid.dim();
  if (n == 0) throw InvalidArgument("posterior grid is empty");
  if (d != data_.domain.dim()) throw InvalidArgument("grid and domain dimensions differ");
  std::vector<double> pts(static_cast<std::size_t>(n * d));
  for (Eigen::Index i = 0; i < n; ++i) {
    grid.point_into(static_cast<std::size_t>(i), {pts.data() + i * d, static_cast<std::size_t>(d)});
  }
  auto pt = [&](Eigen::Index i) {
    return std::span<const double>(pts.data() + i * d, static_cast<std::size_t>(d));
  };

  Posterior post;
  post.grid = grid;
  post.cov.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = eval_kernel(model_.kernel, pt(i), pt(j));
      post.cov(i, j) = v;
      post.cov(j, i) = v;
    }
  }
  post.mean = Vec::Constant(n, model_.prior_mean);
  if (!data_.empty()) {
    Mat cross(static_cast<Eigen::Index>(data_.size()), n);  // K_D*
    for (Eigen::Index i = 0; i < n; ++i) cross.col(i) = data_cross_point(pt(i));
    post.mean += cross.transpose() * alpha_;
    const Mat v = chol_.triangularView<Eigen::Lower>().solve(cross);
    post.cov.noalias() -= v.transpose() * v;
  }
  post.cov = 0.5 * (post.cov + post.cov.transpose()).eval();
  for (Eigen::Index i = 0; i < n; ++i) post.cov(i, i) = std::max(post.cov(i, i), 0.0);
  return post;
}

Posterior fit_posterior(const GPModel& model, const Dataset& data, const Grid& grid) {
  return ConditionedGP(model, data).posterior(grid);
}

double predictive_variance(const GPModel& model, const Dataset& data,
                           const ObservationOperator& candidate) {
  return ConditionedGP(model, data).variance(candidate);
}

// ---------------------------------------------------------------------------

SampleMatrix sample_posterior(const Posterior& post, int draws, Rng& rng, double relative_jitter) {
  if (draws < 2) throw InvalidArgument("sample_posterior needs at least 2 draws");
  const Eigen::Index n = post.mean.size();
  SampleMatrix out;
  out.values = post.mean.transpose().replicate(draws, 1);
  if (n == 0 || post.cov.cwiseAbs().maxCoeff() == 0.0) return out;
  Mat l;
  try {
    l = robust_cholesky(post.cov, relative_jitter);
  } catch (const NumericalFailure&) {
    // Rounding in K** − VᵀV can leave eigenvalues below −jitter when the posterior is tight;
    // fall back to the symmetric square root with those eigenvalues clamped at zero.
    Eigen::SelfAdjointEigenSolver<Mat> eig(post.cov);
    if (eig.info() != Eigen::Success) throw;
    l = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat z(draws, n);
  for (int m = 0; m < draws; ++m) {
    for (Eigen::Index i = 0; i < n; ++i) z(m, i) = normal(rng);
  }
  out.values.noalias() += z * l.transpose();
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// Weights of ∫_s^e of the piecewise-linear interpolant through the axis nodes, with the
// interpolant held constant beyond the axis ends.
void add_linear_integral(const std::vector<double>& axis, double s, double e, double scale,
                         Vec& w) {
  const double first = axis.front();
  const double last = axis.back();
  const auto n = static_cast<Eigen::Index>(axis.size());
  if (s < first) {
    w[0] += scale * (std::min(e, first) - s);
    s = first;
  }
  if (e > last) {
    w[n - 1] += scale * (e - std::max(s, last));
    e = last;
  }
  if (!(e > s)) return;
  auto it = std::upper_bound(axis.begin(), axis.end(), s);
  auto cell = static_cast<Eigen::Index>(std::max<std::ptrdiff_t>(0, (it - axis.begin()) - 1));
  for (; cell < n - 1 && axis[cell] < e; ++cell) {
    const double x0 = axis[cell];
    const double x1 = axis[cell + 1];
    const double a = std::max(s, x0);
    const double b = std::min(e, x1);
    if (!(b > a)) continue;
    const double h = x1 - x0;
    w[cell] += scale * ((x1 - a) * (x1 - a) - (x1 - b) * (x1 - b)) / (2.0 * h);
    w[cell + 1] += scale * ((b - x0) * (b - x0) - (a - x0) * (a - x0)) / (2.0 * h);
  }
}

}  // namespace

Vec operator_grid_weights(const Grid& grid, const ObservationOperator& op, const Domain& domain,
                          const QuadratureOptions& quad) {
  op.validate(domain);
  if (grid.dim() != op.dim()) throw InvalidArgument("grid and operator dimensions differ");
  Vec w = Vec::Zero(static_cast<Eigen::Index>(grid.size()));
  std::vector<std::pair<std::size_t, double>> interp;

  if (op.is_point_like()) {
    grid.interpolation_weights(op.location, interp);
    for (const auto& [i, c] : interp) w[static_cast<Eigen::Index>(i)] += c;
    return w;
  }

  switch (op.kind) {
    case OperatorKind::IntervalMean: {
      const double h = grid.max_spacing(0);
      if (op.width < 3.0 * h) {
        throw InvalidArgument("grid too coarse for interval width (fewer than 4 nodes in support)");
      }
      const double q = op.location[0];
      for (const auto& piece : fold_interval(q - 0.5 * op.width, q + 0.5 * op.width, domain)) {
        const double scale = piece.weight / op.width;
        if (piece.end > piece.start) {
          add_linear_integral(grid.axis(0), piece.start, piece.end, scale, w);
        } else {
          const double x[1] = {piece.start};
          grid.interpolation_weights(x, interp);
          for (const auto& [i, c] : interp) w[static_cast<Eigen::Index>(i)] += scale * c;
        }
      }
      return w;
    }
    case OperatorKind::SmoothedGradient: {
      const double h = grid.max_spacing(0);
      if (4.0 * op.width < 3.0 * h) {
        throw InvalidArgument("grid too coarse for gradient width (fewer than 4 nodes in support)");
      }
      // d/dq ∫ f_ext φ_w(x − q) dx = ∫ f_ext' φ_w(x − q) dx; the interpolant's slope is constant
      // per cell, so each cell contributes slope × (Gaussian mass over the cell and its images).
      const auto& axis = grid.axis(0);
      const double q = op.location[0];
      const double s = op.width;
      const double lo = domain.lower[0];
      const double len = domain.upper[0] - lo;
      auto mass = [&](double a, double b) {
        return normal::cdf((b - q) / s) - normal::cdf((a - q) / s);
      };
      for (std::size_t c = 0; c + 1 < axis.size(); ++c) {
        const double x0 = axis[c];
        const double x1 = axis[c + 1];
        double p = mass(x0, x1);
        if (domain.extension == Extension::Reflect) {
          for (int k = -2; k <= 2; ++k) {
            const double shift = 2.0 * k * len;
            if (k != 0) p += mass(x0 + shift, x1 + shift);
            // Mirror image about lo (slope flips sign).
            p -= mass(2.0 * lo - x1 + shift, 2.0 * lo - x0 + shift);
          }
        }
        const double slope_weight = p / (x1 - x0);
        w[static_cast<Eigen::Index>(c)] -= slope_weight;
        w[static_cast<Eigen::Index>(c + 1)] += slope_weight;
      }
      return w;
    }
    case OperatorKind::DiskMean: {
      const double hx = grid.max_spacing(0);
      const double hy = grid.max_spacing(1);
      if (std::numbers::pi * op.width * op.width < 4.0 * hx * hy) {
        throw InvalidArgument("grid too coarse for disk radius (fewer than 4 nodes in support)");
      }
      auto rule = disk_quadrature_nodes(op.width, {op.location[0], op.location[1]}, quad.disk_degree,
                                        Normalization::Mean);
      for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const double x[2] = {domain.fold(0, rule.nodes.coords[2 * k]),
                             domain.fold(1, rule.nodes.coords[2 * k + 1])};
        grid.interpolation_weights(x, interp);
        for (const auto& [i, c] : interp) w[static_cast<Eigen::Index>(i)] += rule.nodes.weights[k] * c;
      }
      return w;
    }
    case OperatorKind::Point: break;
  }
  throw UnsupportedOperation("operator cannot be applied to gridded samples");
}

Vec apply_operator_to_samples(const SampleMatrix& samples, const Grid& grid,
                              const ObservationOperator& op, const Domain& domain,
                              const QuadratureOptions& quad) {
  if (samples.values.cols() != static_cast<Eigen::Index>(grid.size())) {
    throw InvalidArgument("sample matrix width does not match the grid");
  }
  return samples.values * operator_grid_weights(grid, op, domain, quad);
}

// ---------------------------------------------------------------------------

LooTerms loo_terms(const GPModel& model, const Dataset& data) {
  if (data.size() < 2) throw InvalidArgument("leave-one-out needs at least 2 records");
  model.validate();
  data.validate();
  const auto fs = data_functionals(model, data);
  Mat k = data_gram(model, data, fs, nullptr);
  k.diagonal().array() += model.noise_variance;
  const Mat l = robust_cholesky(k, model.jitter);
  const auto n = k.rows();
  Mat kinv = Mat::Identity(n, n);
  l.triangularView<Eigen::Lower>().solveInPlace(kinv);
  l.triangularView<Eigen::Lower>().transpose().solveInPlace(kinv);
  const Vec alpha = kinv * centered_targets(model, data);
  LooTerms t;
  t.residual.resize(n);
  t.variance.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    t.variance[i] = 1.0 / kinv(i, i);
    t.residual[i] = alpha[i] / kinv(i, i);
  }
  t.resolution = 10.0 * model.jitter * k.diagonal().maxCoeff();
  return t;
}

namespace {

double loo_score(const LooTerms& t, double scale) {
  const double log2pi = std::log(2.0 * std::numbers::pi);
  double s = 0.0;
  for (Eigen::Index i = 0; i < t.residual.size(); ++i) {
    if (!(t.variance[i] > t.resolution)) return kLooFloor;
    const double v = scale * t.variance[i];
    s += -0.5 * std::log(v) - t.residual[i] * t.residual[i] / (2.0 * v) - 0.5 * log2pi;
  }
  if (!std::isfinite(s)) return kLooFloor;
  return std::max(s, kLooFloor);
}

void scale_kernel(KernelSpec& k, double factor) {
  if (k.family == KernelFamily::Sum) {
    for (auto& c : k.children) scale_kernel(c, factor);
  } else {
    k.signal_variance *= factor;
  }
}

void set_length_scale(KernelSpec& k, double length) {
  if (k.family == KernelFamily::Sum) {
    for (auto& c : k.children) set_length_scale(c, length);
  } else {
    k.length_scale = length;
  }
}

constexpr double kMinStep = 1e-9;
constexpr int kScanPoints = 5;

double leading_length_scale(const KernelSpec& k) {
  return k.family == KernelFamily::Sum ? leading_length_scale(k.children.front()) : k.length_scale;
}

}  // namespace

double loo_objective(const GPModel& model, const Dataset& data) {
  return loo_score(loo_terms(model, data), 1.0);
}

HyperSearchResult optimize_hypers(const GPModel& model, const Dataset& data, int budget,
                                  const HyperBounds& bounds) {
  if (budget < 1) throw InvalidArgument("hyperparameter budget must be >= 1");
  HyperSearchResult result;
  result.model = model;
  if (data.size() < 2) return result;
  try {
    result.score = loo_objective(model, data);
  } catch (const NumericalFailure&) {
    result.score = kLooFloor;
  }

  const double total = model.kernel.total_variance();
  const double l0 = std::clamp(leading_length_scale(model.kernel), bounds.length_min, bounds.length_max);
  const double rho0 = std::clamp(model.noise_variance / total, bounds.noise_min, bounds.noise_max);
  const std::array<double, 2> glo{std::log(bounds.length_min), std::log(bounds.noise_min)};
  const std::array<double, 2> ghi{std::log(bounds.length_max), std::log(bounds.noise_max)};

  bool any_ok = false;
  // Scores one point in (log length, log noise ratio) space, updating the incumbent.
  auto evaluate = [&](const std::array<double, 2>& c) -> double {
    ++result.evaluations;
    GPModel trial = model;
    set_length_scale(trial.kernel, std::exp(c[0]));
    scale_kernel(trial.kernel, 1.0 / total);
    trial.noise_variance = std::exp(c[1]);
    LooTerms terms;
    try {
      terms = loo_terms(trial, data);
    } catch (const NumericalFailure&) {
      return -std::numeric_limits<double>::infinity();
    }
    // The LOO density is maximized over a common scale factor in closed form.
    double scale = 0.0;
    for (Eigen::Index i = 0; i < terms.residual.size(); ++i) {
      scale += terms.residual[i] * terms.residual[i] / terms.variance[i];
    }
    scale /= static_cast<double>(terms.residual.size());
    if (!(scale > 0.0) || !std::isfinite(scale)) return -std::numeric_limits<double>::infinity();
    any_ok = true;
    const double score = loo_score(terms, scale);
    if (score > result.score) {
      scale_kernel(trial.kernel, scale);
      trial.noise_variance *= scale;
      result.model = trial;
      result.score = score;
    }
    return score;
  };

  // Incoming hyperparameters, then a coarse length-scale scan at the incoming noise ratio, then
  // compass search from the best point seen. The scan gets past the flat region at large
  // length scales where a local search stalls.
  std::array<double, 2> x{std::log(l0), std::log(rho0)};
  double fx = evaluate(x);
  const double spacing = (ghi[0] - glo[0]) / (kScanPoints - 1);
  for (int i = 0; i < kScanPoints && result.evaluations < budget; ++i) {
    const std::array<double, 2> y{glo[0] + i * spacing, std::log(rho0)};
    if (y == x) continue;
    const double fy = evaluate(y);
    if (fy > fx) {
      x = y;
      fx = fy;
    }
  }
  std::array<double, 2> step{0.5 * spacing, 1.5};
  while (result.evaluations < budget) {
    bool moved = false;
    for (int d = 0; d < 4 && result.evaluations < budget; ++d) {
      std::array<double, 2> y = x;
      const int axis = d / 2;
      y[axis] = std::clamp(y[axis] + (d % 2 == 0 ? step[axis] : -step[axis]), glo[axis], ghi[axis]);
      if (y == x) continue;
      const double fy = evaluate(y);
      if (fy > fx) {
        x = y;
        fx = fy;
        moved = true;
        break;
      }
    }
    if (!moved) {
      step[0] *= 0.5;
      step[1] *= 0.5;
      if (step[0] < kMinStep && step[1] < kMinStep) break;
    }
  }
  result.warning = !any_ok;
  return result;
}

}  // namespace gpdc
