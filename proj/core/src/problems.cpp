#include "gpdc/problems.hpp"

#include "gpdc/errors.hpp"
#include "gpdc/gp.hpp"
#include "gpdc/normal.hpp"
#include "gpdc/quadrature.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numbers>
#include <sstream>

namespace gpdc {

Curve::Curve(std::vector<double> values, double lower, double upper)
    : values_(std::move(values)), lower_(lower), upper_(upper) {
  if (values_.size() < 2) throw InvalidArgument("a curve needs at least 2 values");
  if (!(upper_ > lower_)) throw InvalidArgument("curve bounds must satisfy lower < upper");
  h_ = (upper_ - lower_) / static_cast<double>(values_.size() - 1);
}

double Curve::operator()(double x) const {
  if (!(x > lower_)) return values_.front();
  if (!(x < upper_)) return values_.back();
  const double u = (x - lower_) / h_;
  const auto i = std::min(static_cast<std::size_t>(u), values_.size() - 2);
  const double t = u - static_cast<double>(i);
  return (1.0 - t) * values_[i] + t * values_[i + 1];
}

double Curve::max_value() const { return *std::max_element(values_.begin(), values_.end()); }

Vec Curve::sample(const Grid& grid) const {
  if (grid.dim() != 1) throw InvalidArgument("curve can only be sampled on a 1-D grid");
  Vec out(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) out[static_cast<Eigen::Index>(i)] = (*this)(grid.axis(0)[i]);
  return out;
}

double Curve::integral(double a, double b) const {
  if (b < a) return -integral(b, a);
  double acc = 0.0;
  if (a < lower_) {
    acc += values_.front() * (std::min(b, lower_) - a);
    a = lower_;
  }
  if (b > upper_) {
    acc += values_.back() * (b - std::max(a, upper_));
    b = upper_;
  }
  if (!(b > a)) return acc;
  const auto last_cell = values_.size() - 2;
  auto cell = std::min(static_cast<std::size_t>((a - lower_) / h_), last_cell);
  for (; cell <= last_cell; ++cell) {
    const double x0 = node(cell);
    const double x1 = cell == last_cell ? upper_ : node(cell + 1);
    if (x0 >= b) break;
    const double s = std::max(a, x0);
    const double e = std::min(b, x1);
    if (e > s) acc += 0.5 * ((*this)(s) + (*this)(e)) * (e - s);
  }
  return acc;
}

// ---------------------------------------------------------------------------

KernelSpec random_function_kernel(const RandomFunctionOptions& opts) {
  return KernelSpec::sum({KernelSpec::rational_quadratic(opts.length_scale, opts.rq_variance,
                                                         opts.rq_mixture),
                          KernelSpec::matern32(opts.length_scale, opts.matern_variance)});
}

RandomFunctionGenerator::RandomFunctionGenerator(RandomFunctionOptions opts) : opts_(opts) {
  if (opts_.points < 2) throw InvalidArgument("random functions need at least 2 grid points");
  const KernelSpec k = random_function_kernel(opts_);
  k.validate();
  const auto n = static_cast<Eigen::Index>(opts_.points);
  const double h = 1.0 / static_cast<double>(n - 1);
  Mat cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = k.at_distance(static_cast<double>(i - j) * h);
      cov(i, j) = v;
      cov(j, i) = v;
    }
  }
  chol_ = robust_cholesky(cov, 1e-10);
}

Curve RandomFunctionGenerator::draw(Rng& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec z(chol_.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
  const Vec f = chol_.triangularView<Eigen::Lower>() * z;
  return Curve(std::vector<double>(f.data(), f.data() + f.size()));
}

Curve gen_random_function(std::uint64_t seed, const RandomFunctionOptions& opts) {
  Rng rng = make_rng(seed, fnv1a("random-function"));
  const RandomFunctionOptions defaults;
  const bool is_default = opts.points == defaults.points && opts.length_scale == defaults.length_scale &&
                          opts.rq_variance == defaults.rq_variance &&
                          opts.matern_variance == defaults.matern_variance &&
                          opts.rq_mixture == defaults.rq_mixture;
  if (is_default) {
    static const RandomFunctionGenerator shared;
    return shared.draw(rng);
  }
  return RandomFunctionGenerator(opts).draw(rng);
}

// ---------------------------------------------------------------------------

const char* to_string(BenchmarkName name) noexcept {
  switch (name) {
    case BenchmarkName::Himmelblau: return "himmelblau";
    case BenchmarkName::Eggholder: return "eggholder";
    case BenchmarkName::Branin: return "branin";
    case BenchmarkName::GoldsteinPrice: return "goldstein-price";
  }
  return "?";
}

BenchmarkName benchmark_from_string(const std::string& name) {
  for (auto b : {BenchmarkName::Himmelblau, BenchmarkName::Eggholder, BenchmarkName::Branin,
                 BenchmarkName::GoldsteinPrice}) {
    if (name == to_string(b)) return b;
  }
  throw InvalidArgument("unknown benchmark: " + name);
}

Benchmark Benchmark::get(BenchmarkName name) {
  switch (name) {
    case BenchmarkName::Himmelblau:
      return {name, {-6.0, -6.0}, {6.0, 6.0}, 0.0, {3.0, 2.0}};
    case BenchmarkName::Eggholder:
      return {name, {-512.0, -512.0}, {512.0, 512.0}, -959.640663, {512.0, 404.2319}};
    case BenchmarkName::Branin:
      return {name, {-5.0, 0.0}, {10.0, 15.0}, 0.39788736, {std::numbers::pi, 2.275}};
    case BenchmarkName::GoldsteinPrice:
      return {name, {-2.0, -2.0}, {2.0, 2.0}, 3.0, {0.0, -1.0}};
  }
  throw InvalidArgument("unknown benchmark");
}

std::array<double, 2> Benchmark::from_unit(std::span<const double> u) const {
  if (u.size() != 2) throw InvalidArgument("benchmarks are two-dimensional");
  return {lower[0] + u[0] * (upper[0] - lower[0]), lower[1] + u[1] * (upper[1] - lower[1])};
}

double eval_benchmark(const Benchmark& b, std::span<const double> x) {
  if (x.size() != 2) throw InvalidArgument("benchmarks are two-dimensional");
  for (int a = 0; a < 2; ++a) {
    const double slack = 1e-12 * (b.upper[a] - b.lower[a]);
    if (!(x[a] >= b.lower[a] - slack && x[a] <= b.upper[a] + slack)) {
      throw InvalidArgument(std::string("point outside the ") + to_string(b.name) + " domain");
    }
  }
  const double x1 = x[0];
  const double x2 = x[1];
  switch (b.name) {
    case BenchmarkName::Himmelblau: {
      const double p = x1 * x1 + x2 - 11.0;
      const double q = x1 + x2 * x2 - 7.0;
      return p * p + q * q;
    }
    case BenchmarkName::Eggholder:
      return -(x2 + 47.0) * std::sin(std::sqrt(std::abs(x2 + 0.5 * x1 + 47.0))) -
             x1 * std::sin(std::sqrt(std::abs(x1 - (x2 + 47.0))));
    case BenchmarkName::Branin: {
      constexpr double pi = std::numbers::pi;
      const double bb = 5.1 / (4.0 * pi * pi);
      const double c = 5.0 / pi;
      const double t = 1.0 / (8.0 * pi);
      const double p = x2 - bb * x1 * x1 + c * x1 - 6.0;
      return p * p + 10.0 * (1.0 - t) * std::cos(x1) + 10.0;
    }
    case BenchmarkName::GoldsteinPrice: {
      const double u = 19.0 - 14.0 * x1 + 3.0 * x1 * x1 - 14.0 * x2 + 6.0 * x1 * x2 + 3.0 * x2 * x2;
      const double v = 18.0 - 32.0 * x1 + 12.0 * x1 * x1 + 48.0 * x2 - 36.0 * x1 * x2 + 27.0 * x2 * x2;
      const double s = x1 + x2 + 1.0;
      const double d = 2.0 * x1 - 3.0 * x2;
      return (1.0 + s * s * u) * (30.0 + d * d * v);
    }
  }
  throw InvalidArgument("unknown benchmark");
}

// ---------------------------------------------------------------------------

ElevationGrid::ElevationGrid(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (rows_ < 2 || cols_ < 2) throw FormatError("elevation grids need at least 2 rows and 2 columns");
  if (values_.size() != rows_ * cols_) throw FormatError("elevation value count does not match H×W");
}

namespace {

double reflect_unit(double x) {
  double m = std::fmod(x, 2.0);
  if (m < 0.0) m += 2.0;
  return m > 1.0 ? 2.0 - m : m;
}

}  // namespace

double ElevationGrid::operator()(double x, double y) const {
  const double u = reflect_unit(x) * static_cast<double>(cols_ - 1);
  const double v = (1.0 - reflect_unit(y)) * static_cast<double>(rows_ - 1);
  const auto c = std::min(static_cast<std::size_t>(u), cols_ - 2);
  const auto r = std::min(static_cast<std::size_t>(v), rows_ - 2);
  const double tu = u - static_cast<double>(c);
  const double tv = v - static_cast<double>(r);
  return (1.0 - tv) * ((1.0 - tu) * at(r, c) + tu * at(r, c + 1)) +
         tv * ((1.0 - tu) * at(r + 1, c) + tu * at(r + 1, c + 1));
}

Vec ElevationGrid::sample(const Grid& grid) const {
  if (grid.dim() != 2) throw InvalidArgument("elevation surfaces are sampled on 2-D grids");
  Vec out(static_cast<Eigen::Index>(grid.size()));
  double p[2];
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.point_into(i, p);
    out[static_cast<Eigen::Index>(i)] = (*this)(p[0], p[1]);
  }
  return out;
}

ElevationGrid ElevationGrid::rescaled() const {
  const auto [lo, hi] = std::minmax_element(values_.begin(), values_.end());
  const double span = *hi - *lo;
  std::vector<double> v(values_.size(), 0.0);
  if (span > 0.0) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = (values_[i] - *lo) / span;
  }
  return {rows_, cols_, std::move(v)};
}

ElevationGrid read_ascii_grid(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  auto parse_row = [&]() {
    std::vector<double> out;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (true) {
      while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
      if (p == end) break;
      double v = 0.0;
      const char* start = p;
      if (*p == '+') ++p;
      auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc() || (res.ptr < end && *res.ptr != ' ' && *res.ptr != '\t' && *res.ptr != '\r')) {
        throw IoError("malformed number at line " + std::to_string(line_no) + ", offset " +
                      std::to_string(start - line.data() + 1));
      }
      out.push_back(v);
      p = res.ptr;
    }
    return out;
  };

  if (!next_line()) throw IoError("empty grid file");
  const auto header = parse_row();
  if (header.size() != 2 || header[0] != std::floor(header[0]) || header[1] != std::floor(header[1]) ||
      header[0] < 2 || header[1] < 2) {
    throw FormatError("grid header must be 'H W' with H, W >= 2 (line " + std::to_string(line_no) + ")");
  }
  const auto rows = static_cast<std::size_t>(header[0]);
  const auto cols = static_cast<std::size_t>(header[1]);
  std::vector<double> values;
  values.reserve(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!next_line()) {
      throw FormatError("expected " + std::to_string(rows) + " rows, found " + std::to_string(r));
    }
    const auto row = parse_row();
    if (row.size() != cols) {
      throw FormatError("row at line " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                        " values, expected " + std::to_string(cols));
    }
    values.insert(values.end(), row.begin(), row.end());
  }
  if (next_line()) throw FormatError("unexpected data after the last row (line " + std::to_string(line_no) + ")");
  return {rows, cols, std::move(values)};
}

void write_ascii_grid(std::ostream& out, const ElevationGrid& grid) {
  out << grid.rows() << ' ' << grid.cols() << '\n';
  char buf[64];
  for (std::size_t r = 0; r < grid.rows(); ++r) {
    for (std::size_t c = 0; c < grid.cols(); ++c) {
      const auto res = std::to_chars(buf, buf + sizeof buf, grid.at(r, c));
      if (c > 0) out << ' ';
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

ElevationGrid load_elevation_grid(const std::string& path, const std::string& format) {
  if (format != "ascii") throw InvalidArgument("unsupported grid format: " + format);
  std::ifstream in(path);
  if (!in) throw IoError("cannot open grid file: " + path);
  return read_ascii_grid(in).rescaled();
}

void save_elevation_grid(const std::string& path, const ElevationGrid& grid) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write grid file: " + path);
  write_ascii_grid(out, grid);
  if (!out) throw IoError("failed writing grid file: " + path);
}

ElevationGrid synthetic_surface(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw InvalidArgument("surface size must be >= 2");
  Rng rng = make_rng(seed, fnv1a("synthetic-surface"));
  struct Bump {
    double amp, cx, cy, s;
  };
  std::vector<Bump> bumps;
  auto add_scale = [&](int count, double amp_lo, double amp_hi, double s_lo, double s_hi) {
    for (int i = 0; i < count; ++i) {
      const double sign = uniform01(rng) < 0.5 ? -1.0 : 1.0;
      const double amp = sign * (amp_lo + (amp_hi - amp_lo) * uniform01(rng));
      const double cx = uniform01(rng);
      const double cy = uniform01(rng);
      const double s = s_lo + (s_hi - s_lo) * uniform01(rng);
      bumps.push_back({amp, cx, cy, s});
    }
  };
  add_scale(4, 0.6, 1.0, 0.2, 0.35);
  add_scale(10, 0.2, 0.45, 0.07, 0.12);
  add_scale(40, 0.08, 0.2, 0.025, 0.045);
  const double tilt_x = uniform01(rng) - 0.5;
  const double tilt_y = uniform01(rng) - 0.5;

  std::vector<double> v(n * n);
  const double h = 1.0 / static_cast<double>(n - 1);
  for (std::size_t r = 0; r < n; ++r) {
    const double y = 1.0 - static_cast<double>(r) * h;
    for (std::size_t c = 0; c < n; ++c) {
      const double x = static_cast<double>(c) * h;
      double z = tilt_x * x + tilt_y * y;
      for (const auto& b : bumps) {
        const double dx = x - b.cx;
        const double dy = y - b.cy;
        z += b.amp * std::exp(-(dx * dx + dy * dy) / (2.0 * b.s * b.s));
      }
      v[r * n + c] = z;
    }
  }
  return {n, n, std::move(v)};
}

// ---------------------------------------------------------------------------

double true_interval_mean(const Curve& f, double q, double w) {
  if (!(w >= 0.0)) throw InvalidArgument("interval width must be nonnegative");
  if (w == 0.0) return f(q);
  return f.integral(q - 0.5 * w, q + 0.5 * w) / w;
}

double true_smoothed_gradient(const Curve& f, double q, double w) {
  if (!(w > 0.0)) throw InvalidArgument("smoothed gradient needs a positive width");
  // The interpolant has a constant slope per cell and none beyond the ends.
  const auto& v = f.values();
  double acc = 0.0;
  for (std::size_t c = 0; c + 1 < v.size(); ++c) {
    const double x0 = f.node(c);
    const double x1 = c + 2 == v.size() ? f.upper() : f.node(c + 1);
    const double mass = normal::cdf((x1 - q) / w) - normal::cdf((x0 - q) / w);
    if (mass == 0.0) continue;
    acc += (v[c + 1] - v[c]) / (x1 - x0) * mass;
  }
  return acc;
}

double true_disk_mean(const ElevationGrid& grid, double qx, double qy, double r, int degree) {
  if (!(r >= 0.0)) throw InvalidArgument("disk radius must be nonnegative");
  if (r == 0.0) return grid(qx, qy);
  const auto rule = disk_quadrature_nodes(r, {qx, qy}, degree, Normalization::Mean);
  return rule.nodes.integrate([&](std::span<const double> p) { return grid(p[0], p[1]); });
}

}  // namespace gpdc
