#pragma once

#include "gpdc/geometry.hpp"
#include "gpdc/kernels.hpp"
#include "gpdc/random.hpp"

#include <optional>
#include <vector>

namespace gpdc {

struct Observation {
  ObservationOperator op;
  double y = 0.0;
};

/// Ordered observations over a common domain.
struct Dataset {
  Domain domain;
  std::vector<Observation> records;

  void add(ObservationOperator op, double y);
  [[nodiscard]] std::size_t size() const noexcept { return records.size(); }
  [[nodiscard]] bool empty() const noexcept { return records.empty(); }
  void validate() const;
};

struct GPModel {
  KernelSpec kernel = KernelSpec::matern52(0.1);
  double noise_variance = 1e-6;
  /// Relative diagonal jitter: the first attempt adds jitter·max(diag).
  double jitter = 1e-10;
  /// Constant prior mean of the latent function.
  double prior_mean = 0.0;
  QuadratureOptions quadrature;

  void validate() const;
};

/// Posterior of the latent function on a grid of representative points.
struct Posterior {
  Grid grid;
  Vec mean;
  Mat cov;

  [[nodiscard]] Vec stddev() const;
};

/// M×N matrix of posterior draws, one draw per row.
struct SampleMatrix {
  Mat values;

  [[nodiscard]] Eigen::Index draws() const noexcept { return values.rows(); }
};

/// Cholesky factor of `matrix + jitter·max(diag)·I`, escalating the jitter ×10 up to three more
/// times. Throws NumericalFailure (with a pivot-ratio condition estimate) if every attempt fails.
Mat robust_cholesky(const Mat& matrix, double relative_jitter);

/// GP conditioned on a dataset. Holds the Cholesky factor of the data gram so that means,
/// variances and posteriors for many operators share one factorization.
class ConditionedGP {
 public:
  ConditionedGP(GPModel model, Dataset data, CovarianceCache* cache = nullptr);

  [[nodiscard]] const GPModel& model() const noexcept { return model_; }
  [[nodiscard]] const Dataset& data() const noexcept { return data_; }

  /// Prior covariance between two operators (through the cache when one was supplied).
  [[nodiscard]] double prior_cov(const ObservationOperator& a, const ObservationOperator& b) const;

  [[nodiscard]] double mean(const ObservationOperator& op) const;
  /// Var(op[f] | data) of the latent function, clamped at 0.
  [[nodiscard]] double variance(const ObservationOperator& op) const;
  [[nodiscard]] std::vector<double> variances(std::span<const ObservationOperator> ops) const;

  /// Mean and latent covariance on the grid.
  [[nodiscard]] Posterior posterior(const Grid& grid) const;

 private:
  [[nodiscard]] Vec data_cross(const ObservationOperator& op) const;
  [[nodiscard]] Vec data_cross_point(std::span<const double> x) const;

  GPModel model_;
  Dataset data_;
  CovarianceCache* cache_;
  std::vector<WeightedNodes> functionals_;
  Mat chol_;    // lower factor of K + σ_n² I
  Vec alpha_;   // (K + σ_n² I)⁻¹ (y − m)
};

Posterior fit_posterior(const GPModel& model, const Dataset& data, const Grid& grid);

double predictive_variance(const GPModel& model, const Dataset& data,
                           const ObservationOperator& candidate);

/// M i.i.d. draws from N(mean, cov) via Cholesky of cov plus jitter, or a clamped symmetric
/// square root when the jittered factorization fails. A zero covariance returns the mean in
/// every row.
SampleMatrix sample_posterior(const Posterior& post, int draws, Rng& rng,
                              double relative_jitter = 1e-10);

/// Grid weights w such that op[f] ≈ wᵀ f for a function known on the grid nodes
/// (piecewise-linear / bilinear interpolation, extension per `domain`).
Vec operator_grid_weights(const Grid& grid, const ObservationOperator& op, const Domain& domain,
                          const QuadratureOptions& quad = {});

/// Applies the operator to every gridded draw.
Vec apply_operator_to_samples(const SampleMatrix& samples, const Grid& grid,
                              const ObservationOperator& op, const Domain& domain,
                              const QuadratureOptions& quad = {});

/// Returned by loo_objective when the leave-one-out density degenerates.
inline constexpr double kLooFloor = -1e30;

/// Per-record leave-one-out predictive means and variances of y.
struct LooTerms {
  Vec residual;  ///< y_i − μ_{−i}
  Vec variance;  ///< σ²_{−i}
  /// Variances at or below this are jitter artifacts of a singular gram; the objective then
  /// returns kLooFloor.
  double resolution = 0.0;
};

LooTerms loo_terms(const GPModel& model, const Dataset& data);

/// Σ_i log p(y_i | y_{−i}) from the closed-form inverse-gram identity.
double loo_objective(const GPModel& model, const Dataset& data);

struct HyperSearchResult {
  GPModel model;
  double score = kLooFloor;
  int evaluations = 0;
  /// Set when every candidate failed numerically and the incoming model was returned.
  bool warning = false;
};

/// Search bounds for length scale and relative noise (σ_n² / σ_f²), both searched in log space.
struct HyperBounds {
  double length_min = 1e-3;
  double length_max = 1.0;
  double noise_min = 1e-8;
  double noise_max = 1e-1;
};

/// Maximizes the LOO objective by compass search in (log length scale, log noise ratio),
/// started from the incoming model and capped at `budget` evaluations. The signal variance of
/// each candidate is set to its closed-form LOO optimum. Never returns a model scoring below
/// the incoming one.
HyperSearchResult optimize_hypers(const GPModel& model, const Dataset& data, int budget,
                                  const HyperBounds& bounds = {});

}  // namespace gpdc
