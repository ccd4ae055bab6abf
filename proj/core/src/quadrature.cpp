#include "gpdc/quadrature.hpp"

#include "gpdc/errors.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace gpdc {

void WeightedNodes::add(std::span<const double> x, double w) {
  coords.insert(coords.end(), x.begin(), x.end());
  weights.push_back(w);
}

void WeightedNodes::add(double x, double w) {
  coords.push_back(x);
  weights.push_back(w);
}

double WeightedNodes::total_weight() const noexcept {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

namespace {

std::pair<std::vector<double>, std::vector<double>> compute_gauss_legendre(int n) {
  std::vector<double> x(n), w(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi initial guess, then Newton on P_n.
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Recompute the derivative at the converged root.
    double p0 = 1.0;
    double p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
  return {std::move(x), std::move(w)};
}

}  // namespace

const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre_reference(int n) {
  if (n < 1) throw InvalidArgument("Gauss-Legendre rule needs at least one node");
  static std::mutex mutex;
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
  return it->second;
}

QuadratureRule gauss_legendre(int n, double a, double b, Normalization norm) {
  const auto& [x, w] = gauss_legendre_reference(n);
  QuadratureRule rule{RuleKind::Interval, n, {}};
  rule.nodes.dim = 1;
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  const double scale = norm == Normalization::Raw ? half : 0.5;
  for (int i = 0; i < n; ++i) rule.nodes.add(mid + half * x[i], scale * w[i]);
  return rule;
}

namespace {
int disk_chords(int degree) { return (degree + 2) / 2; }  // ceil((degree + 1) / 2)
}  // namespace

int disk_rule_size(int degree) {
  const int n = disk_chords(degree);
  return n * n;
}

QuadratureRule disk_quadrature_nodes(double radius, std::array<double, 2> center, int degree,
                                     Normalization norm) {
  if (degree < 1) throw InvalidArgument("disk rule degree must be >= 1");
  if (!(radius > 0.0)) throw InvalidArgument("disk radius must be positive");
  const int chords = disk_chords(degree);
  const auto& [gx, gw] = gauss_legendre_reference(chords);

  QuadratureRule rule{RuleKind::Disk, degree, {}};
  rule.nodes.dim = 2;
  rule.nodes.coords.reserve(2 * chords * chords);
  rule.nodes.weights.reserve(chords * chords);
  const double area = std::numbers::pi * radius * radius;
  const double scale = norm == Normalization::Raw ? radius * radius : radius * radius / area;
  for (int k = 1; k <= chords; ++k) {
    const double theta = k * std::numbers::pi / (chords + 1);
    const double eta = std::cos(theta);
    const double half_chord = std::sin(theta);
    const double chord_weight = std::numbers::pi / (chords + 1) * std::sin(theta);
    for (int i = 0; i < chords; ++i) {
      const double node[2] = {center[0] + radius * eta, center[1] + radius * half_chord * gx[i]};
      rule.nodes.add(node, scale * chord_weight * half_chord * gw[i]);
    }
  }
  return rule;
}

}  // namespace gpdc
