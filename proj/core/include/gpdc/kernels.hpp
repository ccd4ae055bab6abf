#pragma once

#include "gpdc/geometry.hpp"
#include "gpdc/quadrature.hpp"

#include <cstdint>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace gpdc {

enum class KernelFamily { Matern52, Matern32, RationalQuadratic, Sum };

/// Stationary isotropic covariance function. Leaf families use `length_scale`,
/// `signal_variance` and (RationalQuadratic only) `rq_mixture`; `Sum` adds its children.
struct KernelSpec {
  KernelFamily family = KernelFamily::Matern52;
  double length_scale = 1.0;
  double signal_variance = 1.0;
  double rq_mixture = 1.0;
  std::vector<KernelSpec> children;

  static KernelSpec matern52(double length_scale, double signal_variance = 1.0);
  static KernelSpec matern32(double length_scale, double signal_variance = 1.0);
  static KernelSpec rational_quadratic(double length_scale, double signal_variance = 1.0,
                                       double mixture = 1.0);
  static KernelSpec sum(std::vector<KernelSpec> parts);

  /// Throws InvalidArgument when an invariant is broken.
  void validate() const;
  /// k(x, x): the sum of all leaf signal variances.
  [[nodiscard]] double total_variance() const noexcept;
  /// Covariance as a function of Euclidean distance.
  [[nodiscard]] double at_distance(double r) const noexcept;
  [[nodiscard]] std::string describe() const;
  /// Appends every numeric parameter (used for cache keys).
  void append_parameters(std::vector<double>& out) const;
};

/// k(x, x2). Throws InvalidArgument when the dimensions differ.
double eval_kernel(const KernelSpec& spec, std::span<const double> x, std::span<const double> x2);
double eval_kernel(const KernelSpec& spec, const Vec& x, const Vec& x2);

enum class OperatorKind { Point, IntervalMean, SmoothedGradient, DiskMean };

[[nodiscard]] const char* to_string(OperatorKind kind) noexcept;
[[nodiscard]] OperatorKind operator_kind_from_string(const std::string& text);

/// One linear measurement of the latent function.
///
/// - Point: f(location); width must be 0.
/// - IntervalMean: (1/w)∫_{q-w/2}^{q+w/2} f (1-D).
/// - SmoothedGradient: d/dq of f convolved with a Gaussian of standard deviation w (1-D, w > 0).
/// - DiskMean: mean of f over the disk of radius w around q (2-D).
///
/// IntervalMean and DiskMean with width 0 are point evaluations.
struct ObservationOperator {
  OperatorKind kind = OperatorKind::Point;
  std::vector<double> location;
  double width = 0.0;

  static ObservationOperator point(std::vector<double> x);
  static ObservationOperator interval_mean(double q, double w);
  static ObservationOperator smoothed_gradient(double q, double w);
  static ObservationOperator disk_mean(double qx, double qy, double r);

  [[nodiscard]] int dim() const noexcept { return static_cast<int>(location.size()); }
  /// True for operators that reduce to a point evaluation.
  [[nodiscard]] bool is_point_like() const noexcept;
  /// The operator applied to the constant function 1 (0 for gradients, 1 otherwise).
  [[nodiscard]] double unit_response() const noexcept;
  /// Checks operator invariants against a domain (InvalidArgument on violation).
  void validate(const Domain& domain) const;

  friend bool operator==(const ObservationOperator&, const ObservationOperator&) = default;
};

/// Node counts used when an operator is turned into a weighted sum of point evaluations.
struct QuadratureOptions {
  int interval_nodes = 32;     ///< Gauss–Legendre nodes per interval piece
  int disk_degree = 20;        ///< polynomial exactness of the disk rule
  double gaussian_cutoff = 8;  ///< Gaussian windows are truncated at ±cutoff·w

  void validate() const;
};

/// Piece of a folded 1-D interval: ∫ over [start, end] with density `weight`, or a point mass
/// of size `weight` at `start` when start == end.
struct IntervalPiece {
  double start = 0.0;
  double end = 0.0;
  double weight = 0.0;
};

/// Splits ∫_a^b f_ext into pieces inside the 1-D domain according to its extension rule.
std::vector<IntervalPiece> fold_interval(double a, double b, const Domain& domain);

/// The operator as a weighted sum of point evaluations of the function restricted to the
/// domain. The domain extension is folded in: constant extension turns the out-of-box part of
/// an interval into a point mass on the edge, reflection mirrors nodes back into the box.
WeightedNodes to_functional(const ObservationOperator& op, const Domain& domain,
                            const QuadratureOptions& quad = {});


/// Σ_i Σ_j a_i b_j k(x_i, y_j).
double functional_cov(const KernelSpec& spec, const WeightedNodes& a, const WeightedNodes& b);

/// True when Cov(a[f], b[f]) has a closed form: 1-D point or interval operators under
/// Matérn or rational-quadratic (mixture 1) kernels and their sums.
bool has_closed_form_cov(const KernelSpec& spec, const ObservationOperator& a,
                         const ObservationOperator& b);

/// Cov(a[f], b[f]) under a zero-mean GP prior with covariance `spec`.
/// Point–Point pairs evaluate the kernel directly and pairs with a closed form use kernel
/// antiderivatives. Other 1-D pairs use Gauss–Legendre panels split where the kernel is not
/// smooth (coincident points, interval ends); 2-D pairs use the product of the disk rules.
double operator_cross_cov(const KernelSpec& spec, const ObservationOperator& a,
                          const ObservationOperator& b, const Domain& domain,
                          const QuadratureOptions& quad = {});

/// Cov(g(q), b[f]) where g(q) = ∫ f(x) N(x; q, w²) dx is the Gaussian smoothing of f (1-D).
/// The smoothed-gradient operator is the q-derivative of g.
double smoothing_cross_cov(const KernelSpec& spec, double q, double w, const ObservationOperator& b,
                           const Domain& domain, const QuadratureOptions& quad = {});

/// Memo of operator covariances keyed by (operator, operator, kernel, quadrature).
///
/// For single-family kernels the stored value is for unit signal variance, so entries survive
/// a rescaling of the kernel. Operators whose support lies strictly inside the domain are keyed
/// by their offset only (the kernel is stationary), which lets self-covariances of translated
/// candidates share one entry. Thread-safe.
class CovarianceCache {
 public:
  explicit CovarianceCache(std::size_t max_entries = 1 << 20) : max_entries_(max_entries) {}

  double cross_cov(const KernelSpec& spec, const ObservationOperator& a,
                   const ObservationOperator& b, const Domain& domain,
                   const QuadratureOptions& quad = {});

  [[nodiscard]] std::size_t size() const;
  [[nodiscard]] std::size_t hits() const;
  void clear();

 private:
  std::size_t max_entries_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, double> table_;
  std::size_t hits_ = 0;
};

}  // namespace gpdc
