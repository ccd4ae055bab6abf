#pragma once

#include "gpdc/acquisition.hpp"
#include "gpdc/depmeasures.hpp"
#include "gpdc/gp.hpp"

#include <algorithm>
#include <limits>
#include <utility>
#include <string>
#include <vector>

namespace gpdc {

/// Per-replica mutable state threaded through successive policy steps.
struct AcquisitionState {
  int step = 1;  ///< index of the observation about to be made (1-based)
  double incumbent_best = -std::numeric_limits<double>::infinity();
  double gamma_hat = 0.0;  ///< accumulated predictive variance for GP-MI
  Rng rng;

  explicit AcquisitionState(Rng generator = Rng{}) : rng(std::move(generator)) {}

  void record_observation(double y) { incumbent_best = std::max(incumbent_best, y); }
  /// Adds the chosen point's predictive variance (negative inputs are ignored).
  void update_gamma(double chosen_variance);
};

// ---------------------------------------------------------------------------
// Function estimation with adaptive widths
// ---------------------------------------------------------------------------

struct EstimationConfig {
  std::vector<double> widths;
  OperatorKind operator_kind = OperatorKind::IntervalMean;
  int draws = 200;  ///< M
  Grid grid;        ///< representative points; posterior draws live here
  Domain domain = Domain::unit(1);
  double alpha = 1.0;
  /// 0: every grid point is a candidate location. Otherwise a fresh uniform subset of this
  /// many grid points is drawn for every width at every step.
  std::size_t candidate_subset = 0;
  int hyper_budget = 20;
  HyperBounds bounds;
  /// When false the incoming model is used as is (it was fitted to the same data already).
  bool refit = true;

  void validate() const;
};

/// Builds the operator of the configured kind at `location` with `width`.
ObservationOperator make_operator(OperatorKind kind, std::span<const double> location,
                                  double width);

/// Candidates considered for one width: operators and their predictive variances.
struct WidthCandidates {
  double width = 0.0;
  std::vector<ObservationOperator> ops;
  std::vector<double> variances;
};

struct EstimationChoice {
  ObservationOperator op;
  std::size_t width_index = 0;
  std::vector<double> dc_list;  ///< one distance correlation per width
  GPModel model;                ///< hyperparameters used for this step
};

/// Picks the query from candidate variances and posterior draws: per width
/// take the max-variance candidate, push the draws through its operator, score by distance
/// correlation with the full draw matrix, and return the best width. Ties are broken with `rng`.
EstimationChoice choose_estimation_query(std::span<const WidthCandidates> per_width,
                                         const SampleMatrix& draws, const Grid& grid,
                                         const Domain& domain, const QuadratureOptions& quad,
                                         double alpha, Rng& rng);

/// Candidate operators (with variances) for every width under the conditioned GP.
std::vector<WidthCandidates> estimation_candidates(const ConditionedGP& gp,
                                                   const EstimationConfig& cfg, Rng& rng);

/// One full step: re-optimize hyperparameters, condition, draw M samples, pick width and location.
EstimationChoice estimation_step(const GPModel& model, const Dataset& data,
                                 const EstimationConfig& cfg, AcquisitionState& state,
                                 CovarianceCache* cache = nullptr);

/// Baseline: location uniform over the domain box, width uniform over the menu.
ObservationOperator random_estimation_query(const EstimationConfig& cfg, Rng& rng);

/// Baseline: fixed width, location of maximal predictive variance.
EstimationChoice max_variance_step(const GPModel& model, const Dataset& data,
                                   const EstimationConfig& cfg, double width,
                                   AcquisitionState& state, CovarianceCache* cache = nullptr);

/// Sets the constant prior mean to the mean of value-type observations (gradients excluded).
GPModel with_empirical_mean(GPModel model, const Dataset& data);

/// Empirical prior mean followed by the LOO hyperparameter search (skipped below 2 records).
GPModel fit_model(const GPModel& model, const Dataset& data, int budget,
                  const HyperBounds& bounds = {});

// ---------------------------------------------------------------------------
// Maximum search
// ---------------------------------------------------------------------------

enum class MaxPolicyKind {
  GPdCor,
  GPdCov,
  GPdCorX,
  GPdCovX,
  GPMIS,
  Random,
  VarMax,
  PI,
  EI,
  GPUCB,
  GPMI,
  MES,
};

[[nodiscard]] const char* to_string(MaxPolicyKind kind) noexcept;
[[nodiscard]] MaxPolicyKind max_policy_from_string(const std::string& name);
[[nodiscard]] bool uses_posterior_draws(MaxPolicyKind kind) noexcept;

struct MaxPolicyConstants {
  double xi = 1e-3;
  double nu = 1.0;
  double delta_ucb = 0.05;
  double delta_mi = 1e-10;
  int mes_samples = 100;
  double alpha = 1.0;
  int draws = 200;
  int knn_k = 3;
  int hyper_budget = 20;
};

struct MaxPolicy {
  MaxPolicyKind kind = MaxPolicyKind::GPdCor;
  MaxPolicyConstants constants;
};

struct MaxChoice {
  std::size_t index = 0;
  std::vector<double> scores;  ///< per grid point (empty for Random)
  double chosen_variance = 0.0;
  GPModel model;
};

/// Closed-form acquisition values at every grid point from marginal means and deviations.
std::vector<double> analytic_scores(MaxPolicyKind kind, const Vec& mean, const Vec& stddev,
                                    const AcquisitionState& state, const MaxPolicyConstants& c,
                                    int dim, const std::vector<double>& mes_maxima = {});

/// Dependence between each grid point's draw column and the per-draw max (or argmax location).
std::vector<double> sampling_scores(MaxPolicyKind kind, const SampleMatrix& draws, const Grid& grid,
                                    const MaxPolicyConstants& c, Rng& rng);

/// One step of the maximum search for any policy kind. GP-MI steps also add the chosen
/// point's variance to state.gamma_hat.
MaxChoice max_search_step(const GPModel& model, const Dataset& data, const MaxPolicy& policy,
                          const Grid& grid, AcquisitionState& state);

}  // namespace gpdc
