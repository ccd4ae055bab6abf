#include "gpdc/geometry.hpp"

#include "gpdc/errors.hpp"

#include <algorithm>
#include <cmath>

namespace gpdc {

Domain Domain::unit(int dim, Extension ext) {
  return Domain{std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0), ext};
}

bool Domain::contains(std::span<const double> x, double tol) const {
  if (static_cast<int>(x.size()) != dim()) return false;
  for (int a = 0; a < dim(); ++a) {
    if (x[a] < lower[a] - tol || x[a] > upper[a] + tol) return false;
  }
  return true;
}

double Domain::fold(int axis, double x) const {
  const double lo = lower[axis];
  const double hi = upper[axis];
  if (x >= lo && x <= hi) return x;
  if (extension == Extension::Constant) return std::clamp(x, lo, hi);
  const double len = hi - lo;
  double t = std::fmod(x - lo, 2.0 * len);
  if (t < 0) t += 2.0 * len;
  return t <= len ? lo + t : hi - (t - len);
}

void Domain::validate() const {
  if (lower.size() != upper.size() || lower.empty()) {
    throw InvalidArgument("domain bounds must be non-empty and of equal dimension");
  }
  for (int a = 0; a < dim(); ++a) {
    if (!(upper[a] > lower[a])) throw InvalidArgument("domain upper bound must exceed lower bound");
  }
}

Grid::Grid(std::vector<double> axis) {
  if (axis.size() < 2) throw InvalidArgument("grid axis needs at least 2 points");
  if (!std::is_sorted(axis.begin(), axis.end())) throw InvalidArgument("grid axis must be sorted");
  axes_.push_back(std::move(axis));
}

Grid::Grid(std::vector<double> x_axis, std::vector<double> y_axis) {
  for (auto* axis : {&x_axis, &y_axis}) {
    if (axis->size() < 2) throw InvalidArgument("grid axis needs at least 2 points");
    if (!std::is_sorted(axis->begin(), axis->end())) throw InvalidArgument("grid axis must be sorted");
  }
  axes_.push_back(std::move(x_axis));
  axes_.push_back(std::move(y_axis));
}

namespace {
std::vector<double> linspace(std::size_t n, double lo, double hi) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  out.back() = hi;
  return out;
}
}  // namespace

Grid Grid::uniform(std::size_t n, double lo, double hi) {
  if (n < 2) throw InvalidArgument("grid needs at least 2 points");
  return Grid(linspace(n, lo, hi));
}

Grid Grid::mesh(std::size_t n) {
  if (n < 2) throw InvalidArgument("mesh needs at least 2 points per side");
  return Grid(linspace(n, 0.0, 1.0), linspace(n, 0.0, 1.0));
}

std::size_t Grid::size() const noexcept {
  if (axes_.empty()) return 0;
  std::size_t n = 1;
  for (const auto& a : axes_) n *= a.size();
  return n;
}

void Grid::point_into(std::size_t i, std::span<double> out) const {
  if (dim() == 1) {
    out[0] = axes_[0][i];
  } else {
    const std::size_t nx = axes_[0].size();
    out[0] = axes_[0][i % nx];
    out[1] = axes_[1][i / nx];
  }
}

Vec Grid::point(std::size_t i) const {
  Vec p(dim());
  point_into(i, {p.data(), static_cast<std::size_t>(p.size())});
  return p;
}

std::vector<Vec> Grid::points() const {
  std::vector<Vec> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(point(i));
  return out;
}

namespace {
// Cell index and fractional position of x along a sorted axis (clamped to the ends).
std::pair<std::size_t, double> locate(const std::vector<double>& axis, double x) {
  if (x <= axis.front()) return {0, 0.0};
  if (x >= axis.back()) return {axis.size() - 2, 1.0};
  auto it = std::upper_bound(axis.begin(), axis.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - axis.begin());
  const std::size_t lo = hi - 1;
  return {lo, (x - axis[lo]) / (axis[hi] - axis[lo])};
}
}  // namespace

void Grid::interpolation_weights(std::span<const double> x,
                                 std::vector<std::pair<std::size_t, double>>& out) const {
  out.clear();
  if (dim() == 1) {
    const auto [i, t] = locate(axes_[0], x[0]);
    out.emplace_back(i, 1.0 - t);
    out.emplace_back(i + 1, t);
    return;
  }
  const std::size_t nx = axes_[0].size();
  const auto [ix, tx] = locate(axes_[0], x[0]);
  const auto [iy, ty] = locate(axes_[1], x[1]);
  out.emplace_back(iy * nx + ix, (1.0 - tx) * (1.0 - ty));
  out.emplace_back(iy * nx + ix + 1, tx * (1.0 - ty));
  out.emplace_back((iy + 1) * nx + ix, (1.0 - tx) * ty);
  out.emplace_back((iy + 1) * nx + ix + 1, tx * ty);
}

double Grid::max_spacing(int axis) const {
  const auto& a = axes_.at(axis);
  double h = 0.0;
  for (std::size_t i = 1; i < a.size(); ++i) h = std::max(h, a[i] - a[i - 1]);
  return h;
}

}  // namespace gpdc
