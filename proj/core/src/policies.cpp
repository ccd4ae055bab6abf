#include "gpdc/policies.hpp"

#include "gpdc/errors.hpp"

#include <cmath>

namespace gpdc {

void AcquisitionState::update_gamma(double chosen_variance) {
  if (chosen_variance > 0.0) gamma_hat += chosen_variance;
}

void EstimationConfig::validate() const {
  if (widths.empty()) throw InvalidArgument("width menu is empty");
  for (double w : widths) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("widths must be finite and >= 0");
    if (operator_kind == OperatorKind::SmoothedGradient && w == 0.0) {
      throw InvalidArgument("gradient widths must be positive");
    }
  }
  if (draws < 2) throw InvalidArgument("at least 2 posterior draws are required");
  if (grid.size() < 2) throw InvalidArgument("grid needs at least 2 points");
  if (grid.dim() != domain.dim()) throw InvalidArgument("grid and domain dimensions differ");
  domain.validate();
  if (!(alpha > 0.0 && alpha < 2.0)) throw InvalidArgument("alpha must lie in (0, 2)");
  if (hyper_budget < 1) throw InvalidArgument("hyperparameter budget must be >= 1");
}

ObservationOperator make_operator(OperatorKind kind, std::span<const double> location,
                                  double width) {
  switch (kind) {
    case OperatorKind::Point:
      return ObservationOperator::point({location.begin(), location.end()});
    case OperatorKind::IntervalMean:
      if (location.size() != 1) throw InvalidArgument("interval operators are 1-D");
      return ObservationOperator::interval_mean(location[0], width);
    case OperatorKind::SmoothedGradient:
      if (location.size() != 1) throw InvalidArgument("gradient operators are 1-D");
      return ObservationOperator::smoothed_gradient(location[0], width);
    case OperatorKind::DiskMean:
      if (location.size() != 2) throw InvalidArgument("disk operators are 2-D");
      return ObservationOperator::disk_mean(location[0], location[1], width);
  }
  throw InvalidArgument("unknown operator kind");
}

GPModel fit_model(const GPModel& model, const Dataset& data, int budget,
                  const HyperBounds& bounds) {
  GPModel m = with_empirical_mean(model, data);
  if (data.size() < 2) return m;
  return optimize_hypers(m, data, budget, bounds).model;
}

GPModel with_empirical_mean(GPModel model, const Dataset& data) {
  double sum = 0.0;
  int count = 0;
  for (const auto& r : data.records) {
    if (r.op.kind == OperatorKind::SmoothedGradient) continue;
    sum += r.y;
    ++count;
  }
  if (count > 0) model.prior_mean = sum / count;
  return model;
}

// ---------------------------------------------------------------------------

EstimationChoice choose_estimation_query(std::span<const WidthCandidates> per_width,
                                         const SampleMatrix& draws, const Grid& grid,
                                         const Domain& domain, const QuadratureOptions& quad,
                                         double alpha, Rng& rng) {
  if (per_width.empty()) throw InvalidArgument("no widths to choose from");
  const CenteredDistances full(draws.values, alpha);
  EstimationChoice choice;
  std::vector<ObservationOperator> best_ops;
  for (const auto& wc : per_width) {
    if (wc.ops.empty() || wc.ops.size() != wc.variances.size()) {
      throw InvalidArgument("every width needs candidates with variances");
    }
    const std::size_t i = argmax_random_tie(wc.variances, rng);
    best_ops.push_back(wc.ops[i]);
    const Vec pushed = apply_operator_to_samples(draws, grid, wc.ops[i], domain, quad);
    choice.dc_list.push_back(dist_cor(full, CenteredDistances(pushed, alpha)));
  }
  choice.width_index = argmax_random_tie(choice.dc_list, rng);
  choice.op = best_ops[choice.width_index];
  return choice;
}

namespace {

std::vector<std::size_t> candidate_indices(std::size_t grid_size, std::size_t subset, Rng& rng) {
  std::vector<std::size_t> idx(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) idx[i] = i;
  if (subset == 0 || subset >= grid_size) return idx;
  // Partial Fisher–Yates: the first `subset` entries are a uniform sample without replacement.
  for (std::size_t i = 0; i < subset; ++i) {
    std::swap(idx[i], idx[i + uniform_index(rng, grid_size - i)]);
  }
  idx.resize(subset);
  return idx;
}

WidthCandidates candidates_for_width(const ConditionedGP& gp, const EstimationConfig& cfg,
                                     double width, Rng& rng) {
  WidthCandidates wc;
  wc.width = width;
  std::vector<double> x(static_cast<std::size_t>(cfg.grid.dim()));
  for (std::size_t i : candidate_indices(cfg.grid.size(), cfg.candidate_subset, rng)) {
    cfg.grid.point_into(i, x);
    wc.ops.push_back(make_operator(cfg.operator_kind, x, width));
  }
  wc.variances = gp.variances(wc.ops);
  return wc;
}

}  // namespace

std::vector<WidthCandidates> estimation_candidates(const ConditionedGP& gp,
                                                   const EstimationConfig& cfg, Rng& rng) {
  std::vector<WidthCandidates> out;
  out.reserve(cfg.widths.size());
  for (double w : cfg.widths) out.push_back(candidates_for_width(gp, cfg, w, rng));
  return out;
}

EstimationChoice estimation_step(const GPModel& model, const Dataset& data,
                                 const EstimationConfig& cfg, AcquisitionState& state,
                                 CovarianceCache* cache) {
  cfg.validate();
  if (data.empty()) throw InvalidArgument("estimation_step needs at least one observation");
  const GPModel fitted =
      cfg.refit ? fit_model(model, data, cfg.hyper_budget, cfg.bounds) : model;
  const ConditionedGP gp(fitted, data, cache);
  const Posterior post = gp.posterior(cfg.grid);
  const SampleMatrix draws = sample_posterior(post, cfg.draws, state.rng);
  const auto per_width = estimation_candidates(gp, cfg, state.rng);
  EstimationChoice choice = choose_estimation_query(per_width, draws, cfg.grid, cfg.domain,
                                                    fitted.quadrature, cfg.alpha, state.rng);
  choice.model = fitted;
  return choice;
}

ObservationOperator random_estimation_query(const EstimationConfig& cfg, Rng& rng) {
  cfg.validate();
  std::vector<double> x(static_cast<std::size_t>(cfg.domain.dim()));
  for (std::size_t a = 0; a < x.size(); ++a) {
    x[a] = cfg.domain.lower[a] + uniform01(rng) * (cfg.domain.upper[a] - cfg.domain.lower[a]);
  }
  const double w = cfg.widths[uniform_index(rng, cfg.widths.size())];
  return make_operator(cfg.operator_kind, x, w);
}

EstimationChoice max_variance_step(const GPModel& model, const Dataset& data,
                                   const EstimationConfig& cfg, double width,
                                   AcquisitionState& state, CovarianceCache* cache) {
  cfg.validate();
  if (data.empty()) throw InvalidArgument("max_variance_step needs at least one observation");
  const GPModel fitted =
      cfg.refit ? fit_model(model, data, cfg.hyper_budget, cfg.bounds) : model;
  const ConditionedGP gp(fitted, data, cache);
  const WidthCandidates wc = candidates_for_width(gp, cfg, width, state.rng);
  EstimationChoice choice;
  choice.op = wc.ops[argmax_random_tie(wc.variances, state.rng)];
  choice.model = fitted;
  return choice;
}

// ---------------------------------------------------------------------------

namespace {

struct PolicyName {
  MaxPolicyKind kind;
  const char* name;
};

constexpr PolicyName kPolicyNames[] = {
    {MaxPolicyKind::GPdCor, "GP-dCor"}, {MaxPolicyKind::GPdCov, "GP-dCov"},
    {MaxPolicyKind::GPdCorX, "GP-dCor-X"}, {MaxPolicyKind::GPdCovX, "GP-dCov-X"},
    {MaxPolicyKind::GPMIS, "GP-MIS"}, {MaxPolicyKind::Random, "Random"},
    {MaxPolicyKind::VarMax, "VarMax"}, {MaxPolicyKind::PI, "PI"},
    {MaxPolicyKind::EI, "EI"}, {MaxPolicyKind::GPUCB, "GP-UCB"},
    {MaxPolicyKind::GPMI, "GP-MI"}, {MaxPolicyKind::MES, "MES"},
};

}  // namespace

const char* to_string(MaxPolicyKind kind) noexcept {
  for (const auto& p : kPolicyNames) {
    if (p.kind == kind) return p.name;
  }
  return "?";
}

MaxPolicyKind max_policy_from_string(const std::string& name) {
  for (const auto& p : kPolicyNames) {
    if (name == p.name) return p.kind;
  }
  throw InvalidArgument("unknown max-search policy: " + name);
}

bool uses_posterior_draws(MaxPolicyKind kind) noexcept {
  switch (kind) {
    case MaxPolicyKind::GPdCor:
    case MaxPolicyKind::GPdCov:
    case MaxPolicyKind::GPdCorX:
    case MaxPolicyKind::GPdCovX:
    case MaxPolicyKind::GPMIS:
      return true;
    default:
      return false;
  }
}

std::vector<double> analytic_scores(MaxPolicyKind kind, const Vec& mean, const Vec& stddev,
                                    const AcquisitionState& state, const MaxPolicyConstants& c,
                                    int dim, const std::vector<double>& mes_maxima) {
  if (mean.size() != stddev.size()) throw InvalidArgument("mean and stddev lengths differ");
  const auto n = static_cast<std::size_t>(mean.size());
  // Before any observation the incumbent falls back to the best posterior mean.
  const double incumbent =
      std::isfinite(state.incumbent_best) ? state.incumbent_best : mean.maxCoeff();
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double mu = mean[static_cast<Eigen::Index>(i)];
    const double sd = stddev[static_cast<Eigen::Index>(i)];
    switch (kind) {
      case MaxPolicyKind::VarMax: s[i] = sd * sd; break;
      case MaxPolicyKind::PI: s[i] = acq_pi(mu, sd, incumbent, c.xi); break;
      case MaxPolicyKind::EI: s[i] = acq_ei(mu, sd, incumbent); break;
      case MaxPolicyKind::GPUCB:
        s[i] = acq_ucb(mu, sd, std::max(state.step, 1), dim, c.nu, c.delta_ucb);
        break;
      case MaxPolicyKind::GPMI: s[i] = acq_gpmi(mu, sd, state.gamma_hat, c.delta_mi); break;
      case MaxPolicyKind::MES: s[i] = acq_mes(mu, sd, mes_maxima); break;
      default: throw InvalidArgument("policy has no closed-form acquisition");
    }
  }
  return s;
}

std::vector<double> sampling_scores(MaxPolicyKind kind, const SampleMatrix& draws, const Grid& grid,
                                    const MaxPolicyConstants& c, Rng& rng) {
  if (!uses_posterior_draws(kind)) throw InvalidArgument("policy does not score posterior draws");
  const Mat& f = draws.values;
  if (f.cols() != static_cast<Eigen::Index>(grid.size())) {
    throw InvalidArgument("draw matrix width does not match the grid");
  }
  const Eigen::Index m = f.rows();
  const bool by_location = kind == MaxPolicyKind::GPdCorX || kind == MaxPolicyKind::GPdCovX;
  Mat target(m, by_location ? grid.dim() : 1);
  for (Eigen::Index r = 0; r < m; ++r) {
    Eigen::Index arg = 0;
    const double best = f.row(r).maxCoeff(&arg);
    if (by_location) {
      target.row(r) = grid.point(static_cast<std::size_t>(arg)).transpose();
    } else {
      target(r, 0) = best;
    }
  }

  std::vector<double> s(grid.size());
  if (kind == MaxPolicyKind::GPMIS) {
    const Vec t = target.col(0);
    for (std::size_t n = 0; n < s.size(); ++n) {
      s[n] = mi_knn(f.col(static_cast<Eigen::Index>(n)), t, c.knn_k, rng);
    }
    return s;
  }
  const CenteredDistances ct(target, c.alpha);
  const bool correlation = kind == MaxPolicyKind::GPdCor || kind == MaxPolicyKind::GPdCorX;
  for (std::size_t n = 0; n < s.size(); ++n) {
    const CenteredDistances cx(Vec(f.col(static_cast<Eigen::Index>(n))), c.alpha);
    s[n] = correlation ? dist_cor(cx, ct) : dist_cov(cx, ct);
  }
  return s;
}

MaxChoice max_search_step(const GPModel& model, const Dataset& data, const MaxPolicy& policy,
                          const Grid& grid, AcquisitionState& state) {
  if (grid.size() == 0) throw InvalidArgument("grid is empty");
  const auto& c = policy.constants;
  MaxChoice choice;
  if (policy.kind == MaxPolicyKind::Random) {
    choice.index = uniform_index(state.rng, grid.size());
    choice.model = model;
    return choice;
  }
  choice.model = fit_model(model, data, c.hyper_budget);
  const ConditionedGP gp(choice.model, data);
  const Posterior post = gp.posterior(grid);

  if (uses_posterior_draws(policy.kind)) {
    const SampleMatrix draws = sample_posterior(post, c.draws, state.rng);
    choice.scores = sampling_scores(policy.kind, draws, grid, c, state.rng);
  } else {
    std::vector<double> maxima;
    if (policy.kind == MaxPolicyKind::MES) {
      maxima = gumbel_max_samples(post, c.mes_samples, state.rng);
    }
    choice.scores = analytic_scores(policy.kind, post.mean, post.stddev(), state, c, grid.dim(),
                                    maxima);
  }
  choice.index = argmax_random_tie(choice.scores, state.rng);
  choice.chosen_variance = std::max(post.cov(static_cast<Eigen::Index>(choice.index),
                                             static_cast<Eigen::Index>(choice.index)),
                                    0.0);
  if (policy.kind == MaxPolicyKind::GPMI) state.update_gamma(choice.chosen_variance);
  return choice;
}

}  // namespace gpdc
