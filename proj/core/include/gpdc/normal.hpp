#pragma once

#include <cmath>
#include <numbers>

namespace gpdc::normal {

inline constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343819;

[[nodiscard]] inline double pdf(double z) noexcept { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

[[nodiscard]] inline double cdf(double z) noexcept {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

/// Below this the left tail switches to the asymptotic Mills-ratio expansion.
inline constexpr double kTailStart = -30.0;

/// S(z) − 1 where Φ(z) = φ(z) S(z) / (−z) for z ≪ 0 (asymptotic series, seven terms).
[[nodiscard]] inline double mills_series_minus_one(double z) noexcept {
  const double u = 1.0 / (z * z);
  return u * (-1.0 + u * (3.0 + u * (-15.0 + u * (105.0 + u * (-945.0 + u * 10395.0)))));
}

/// log Φ(z), accurate in the far left tail where Φ underflows.
[[nodiscard]] inline double log_cdf(double z) noexcept {
  if (z > 0.0) return std::log1p(-0.5 * std::erfc(z / std::numbers::sqrt2));
  if (z > kTailStart) return std::log(cdf(z));
  return -0.5 * z * z - std::log(-z) - 0.5 * std::log(2.0 * std::numbers::pi) +
         std::log1p(mills_series_minus_one(z));
}

/// φ(z)/Φ(z) without cancellation for very negative z.
[[nodiscard]] inline double pdf_over_cdf(double z) noexcept {
  if (z > kTailStart) return pdf(z) / cdf(z);
  const double log_pdf = -0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi);
  return std::exp(log_pdf - log_cdf(z));
}

}  // namespace gpdc::normal
