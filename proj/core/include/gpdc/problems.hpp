#pragma once

#include "gpdc/geometry.hpp"
#include "gpdc/kernels.hpp"
#include "gpdc/random.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace gpdc {

/// Function on [lower, upper] known on a dense equidistant grid, linear in between and
/// constant beyond the ends.
class Curve {
 public:
  explicit Curve(std::vector<double> values, double lower = 0.0, double upper = 1.0);

  [[nodiscard]] double operator()(double x) const;
  [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
  [[nodiscard]] double lower() const noexcept { return lower_; }
  [[nodiscard]] double upper() const noexcept { return upper_; }
  [[nodiscard]] double spacing() const noexcept { return h_; }
  [[nodiscard]] double node(std::size_t i) const noexcept { return lower_ + h_ * static_cast<double>(i); }
  [[nodiscard]] double max_value() const;
  [[nodiscard]] Vec sample(const Grid& grid) const;

  /// ∫_a^b of the extended interpolant (exact).
  [[nodiscard]] double integral(double a, double b) const;

 private:
  std::vector<double> values_;
  double lower_;
  double upper_;
  double h_;
};

using RandomFunction = Curve;

struct RandomFunctionOptions {
  std::size_t points = 1200;
  double length_scale = 0.02;
  double rq_variance = 1.0;
  double matern_variance = 1.0;
  double rq_mixture = 1.0;
};

/// Rational quadratic plus Matérn 3/2, both with the configured length scale.
KernelSpec random_function_kernel(const RandomFunctionOptions& opts = {});

/// Exact prior draws on the dense grid. The Cholesky factor is computed once per generator.
class RandomFunctionGenerator {
 public:
  explicit RandomFunctionGenerator(RandomFunctionOptions opts = {});
  [[nodiscard]] Curve draw(Rng& rng) const;
  [[nodiscard]] const RandomFunctionOptions& options() const noexcept { return opts_; }

 private:
  RandomFunctionOptions opts_;
  Mat chol_;
};

/// Deterministic per seed; default options share one process-wide generator.
Curve gen_random_function(std::uint64_t seed, const RandomFunctionOptions& opts = {});

enum class BenchmarkName { Himmelblau, Eggholder, Branin, GoldsteinPrice };

[[nodiscard]] const char* to_string(BenchmarkName name) noexcept;
[[nodiscard]] BenchmarkName benchmark_from_string(const std::string& name);

struct Benchmark {
  BenchmarkName name;
  std::array<double, 2> lower;
  std::array<double, 2> upper;
  double known_min;
  std::array<double, 2> argmin;  ///< one global minimizer

  static Benchmark get(BenchmarkName name);
  /// Maps a point of the unit square onto the domain box.
  [[nodiscard]] std::array<double, 2> from_unit(std::span<const double> u) const;
};

/// Un-negated formula value. Throws InvalidArgument outside the domain box.
double eval_benchmark(const Benchmark& b, std::span<const double> x);

/// H×W elevation values; row 0 is the top edge (y = 1) of the unit square. Values between
/// nodes are bilinear; outside the square the surface is reflected about the edges.
class ElevationGrid {
 public:
  ElevationGrid(std::size_t rows, std::size_t cols, std::vector<double> values);

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] double at(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
  [[nodiscard]] double operator()(double x, double y) const;
  [[nodiscard]] Vec sample(const Grid& grid) const;
  /// Affine rescale of the values onto [0, 1].
  [[nodiscard]] ElevationGrid rescaled() const;

  friend bool operator==(const ElevationGrid&, const ElevationGrid&) = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
};

/// Parses the ASCII grid format: a `H W` header followed by H rows of W numbers.
/// Throws IoError (with line number) on malformed numbers, FormatError on a non-rectangular body.
ElevationGrid read_ascii_grid(std::istream& in);
/// Writes the ASCII grid format with round-trip precision.
void write_ascii_grid(std::ostream& out, const ElevationGrid& grid);

/// Reads a grid file and rescales it to [0, 1]. Only `ascii` is supported.
ElevationGrid load_elevation_grid(const std::string& path, const std::string& format = "ascii");
void save_elevation_grid(const std::string& path, const ElevationGrid& grid);

/// Smooth multi-scale test surface on an n×n grid (values not rescaled).
ElevationGrid synthetic_surface(std::size_t n, std::uint64_t seed);

/// (1/w)∫_{q−w/2}^{q+w/2} f; w = 0 evaluates f(q).
double true_interval_mean(const Curve& f, double q, double w);
/// d/dq ∫ f(x) N(x; q, w²) dx. Throws InvalidArgument for w ≤ 0.
double true_smoothed_gradient(const Curve& f, double q, double w);
/// Mean of the surface over the disk of radius r around q (reflection outside the square);
/// r = 0 evaluates the surface at q.
double true_disk_mean(const ElevationGrid& grid, double qx, double qy, double r, int degree = 30);

}  // namespace gpdc
