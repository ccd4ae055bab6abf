#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace gpdc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// How a function on the domain box is continued outside it.
enum class Extension {
  Constant,  ///< f(x) = f(nearest boundary point)
  Reflect,   ///< mirror about each edge
};

/// Axis-aligned box χ together with its extension rule.
struct Domain {
  std::vector<double> lower;
  std::vector<double> upper;
  Extension extension = Extension::Constant;

  static Domain unit(int dim, Extension ext = Extension::Constant);

  [[nodiscard]] int dim() const noexcept { return static_cast<int>(lower.size()); }
  [[nodiscard]] bool contains(std::span<const double> x, double tol = 1e-12) const;
  /// Maps a coordinate along `axis` back into the box according to the extension rule.
  [[nodiscard]] double fold(int axis, double x) const;
  void validate() const;
};

/// Rectilinear grid of representative points. 1-D grids are a sorted axis; 2-D grids are the
/// tensor product of an x axis and a y axis, enumerated with x varying fastest.
class Grid {
 public:
  Grid() = default;
  explicit Grid(std::vector<double> axis);
  Grid(std::vector<double> x_axis, std::vector<double> y_axis);

  /// `n` equidistant points covering [lo, hi] inclusive.
  static Grid uniform(std::size_t n, double lo = 0.0, double hi = 1.0);
  /// n×n mesh covering the unit square.
  static Grid mesh(std::size_t n);

  [[nodiscard]] int dim() const noexcept { return static_cast<int>(axes_.size()); }
  [[nodiscard]] std::size_t size() const noexcept;
  [[nodiscard]] const std::vector<double>& axis(int a) const { return axes_.at(a); }
  [[nodiscard]] Vec point(std::size_t i) const;
  /// Writes point i into `out` (length dim()).
  void point_into(std::size_t i, std::span<double> out) const;
  [[nodiscard]] std::vector<Vec> points() const;

  /// Interpolation weights (index, weight) for an arbitrary location: linear in 1-D,
  /// bilinear in 2-D. The location is clamped to the grid extent.
  void interpolation_weights(std::span<const double> x,
                             std::vector<std::pair<std::size_t, double>>& out) const;

  /// Largest spacing along `axis`.
  [[nodiscard]] double max_spacing(int axis) const;

 private:
  std::vector<std::vector<double>> axes_;
};

}  // namespace gpdc
