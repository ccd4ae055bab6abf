#include "gpdc/acquisition.hpp"

#include "gpdc/errors.hpp"
#include "gpdc/normal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gpdc {

double acq_pi(double mu, double sigma, double incumbent, double xi) {
  if (sigma < 0.0) throw InvalidArgument("sigma must be nonnegative");
  if (sigma == 0.0) return mu > incumbent + xi ? 1.0 : 0.0;
  return normal::cdf((mu - incumbent - xi) / sigma);
}

double acq_ei(double mu, double sigma, double incumbent) {
  if (sigma < 0.0) throw InvalidArgument("sigma must be nonnegative");
  const double gain = mu - incumbent;
  if (sigma == 0.0) return std::max(gain, 0.0);
  const double z = gain / sigma;
  return gain * normal::cdf(z) + sigma * normal::pdf(z);
}

double ucb_tau(int t, int dim, double delta) {
  if (t < 1) throw InvalidArgument("step must be >= 1");
  if (dim < 1) throw InvalidArgument("dimension must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
  const double pi2 = std::numbers::pi * std::numbers::pi;
  return 2.0 * ((0.5 * dim + 2.0) * std::log(static_cast<double>(t)) + std::log(pi2 / (3.0 * delta)));
}

double acq_ucb(double mu, double sigma, int t, int dim, double nu, double delta) {
  if (sigma < 0.0) throw InvalidArgument("sigma must be nonnegative");
  if (!(nu > 0.0)) throw InvalidArgument("nu must be positive");
  return mu + std::sqrt(nu * ucb_tau(t, dim, delta)) * sigma;
}

double acq_gpmi(double mu, double sigma, double gamma_hat, double delta) {
  if (sigma < 0.0) throw InvalidArgument("sigma must be nonnegative");
  if (gamma_hat < 0.0) throw InvalidArgument("gamma_hat must be nonnegative");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
  return mu + std::sqrt(std::log(2.0 / delta)) *
                  (std::sqrt(sigma * sigma + gamma_hat) - std::sqrt(gamma_hat));
}

double acq_mes(double mu, double sigma, std::span<const double> max_samples) {
  if (max_samples.empty()) throw InvalidArgument("MES needs at least one maximum sample");
  if (!(sigma > 0.0)) return 0.0;
  double acc = 0.0;
  for (double y : max_samples) {
    const double g = (y - mu) / sigma;
    if (g > normal::kTailStart) {
      acc += 0.5 * g * normal::pdf_over_cdf(g) - normal::log_cdf(g);
    } else {
      // Both terms grow like γ²/2 and cancel; expand the difference instead.
      const double e = normal::mills_series_minus_one(g);
      acc += 0.5 * g * g * e / (1.0 + e) + 0.5 * std::log(2.0 * std::numbers::pi) + std::log(-g) -
             std::log1p(e);
    }
  }
  return acc / static_cast<double>(max_samples.size());
}

std::vector<double> gumbel_max_samples(const Vec& mean, const Vec& stddev, int count, Rng& rng) {
  if (count < 1) throw InvalidArgument("sample count must be >= 1");
  if (mean.size() == 0 || mean.size() != stddev.size()) {
    throw InvalidArgument("mean and stddev must be non-empty and of equal length");
  }
  const double max_mean = mean.maxCoeff();
  const double max_sd = stddev.maxCoeff();
  if (!(max_sd > 0.0)) return std::vector<double>(static_cast<std::size_t>(count), max_mean);

  auto log_cdf_max = [&](double y) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < mean.size(); ++i) {
      if (stddev[i] > 0.0) {
        acc += normal::log_cdf((y - mean[i]) / stddev[i]);
      } else if (y < mean[i]) {
        return -std::numeric_limits<double>::infinity();
      }
    }
    return acc;
  };
  double hi_bracket = max_mean;
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    hi_bracket = std::max(hi_bracket, mean[i] + 10.0 * stddev[i]);
  }
  const double lo_bracket = max_mean - 10.0 * max_sd;
  auto quantile = [&](double p) {
    const double target = std::log(p);
    double lo = lo_bracket;
    double hi = hi_bracket;
    if (!(log_cdf_max(lo) <= target && log_cdf_max(hi) >= target)) {
      throw NumericalFailure("maximum quantile is not bracketed", 0.0);
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12 * (1.0 + std::abs(hi)); ++it) {
      const double mid = 0.5 * (lo + hi);
      (log_cdf_max(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  const double y1 = quantile(0.25);
  const double y2 = quantile(0.75);
  const double l1 = std::log(-std::log(0.25));
  const double l2 = std::log(-std::log(0.75));
  const double b = std::max((y2 - y1) / (l1 - l2), 1e-12 * max_sd);
  const double a = y1 + b * l1;

  std::vector<double> out(static_cast<std::size_t>(count));
  for (auto& v : out) {
    double u = uniform01(rng);
    u = std::clamp(u, 1e-300, 1.0 - 1e-16);
    v = std::max(a - b * std::log(-std::log(u)), max_mean);
  }
  return out;
}

std::vector<double> gumbel_max_samples(const Posterior& post, int count, Rng& rng) {
  return gumbel_max_samples(post.mean, post.stddev(), count, rng);
}

}  // namespace gpdc
