#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace gpdc {

/// Flat list of weighted nodes in `dim` dimensions. Node i occupies
/// coords[i*dim .. i*dim+dim).
struct WeightedNodes {
  int dim = 1;
  std::vector<double> coords;
  std::vector<double> weights;

  [[nodiscard]] std::size_t size() const noexcept { return weights.size(); }
  [[nodiscard]] std::span<const double> node(std::size_t i) const {
    return {coords.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
  void add(std::span<const double> x, double w);
  void add(double x, double w);
  [[nodiscard]] double total_weight() const noexcept;

  template <typename F>
  [[nodiscard]] double integrate(F&& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < size(); ++i) acc += weights[i] * f(node(i));
    return acc;
  }
};

enum class RuleKind { Interval, Disk };

/// A quadrature rule together with the parameters that produced it.
struct QuadratureRule {
  RuleKind kind = RuleKind::Interval;
  int order = 0;  ///< node count for intervals, polynomial degree for disks
  WeightedNodes nodes;
};

/// Normalization of a region rule: `Mean` weights sum to 1, `Raw` weights sum to the
/// region's measure.
enum class Normalization { Mean, Raw };

/// Gauss–Legendre nodes and weights on [-1, 1] (weights sum to 2). Cached per n.
const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre_reference(int n);

/// n-point Gauss–Legendre rule on [a, b].
QuadratureRule gauss_legendre(int n, double a, double b, Normalization norm = Normalization::Raw);

/// Number of nodes `disk_quadrature_nodes` produces for a given degree.
[[nodiscard]] int disk_rule_size(int degree);

/// Product rule on the disk of `radius` around `center`, exact for bivariate polynomials of
/// total degree ≤ `degree`. Chords x = const are placed at the Chebyshev-U zeros with weights
/// π/(n+1)·sin θ_k times the chord integral, and each chord integral uses Gauss–Legendre.
QuadratureRule disk_quadrature_nodes(double radius, std::array<double, 2> center, int degree,
                                     Normalization norm = Normalization::Mean);

}  // namespace gpdc
