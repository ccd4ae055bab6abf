#include "gpdc/kernels.hpp"

#include "gpdc/errors.hpp"
#include "gpdc/normal.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

namespace gpdc {

// ---------------------------------------------------------------------------
// KernelSpec
// ---------------------------------------------------------------------------

KernelSpec KernelSpec::matern52(double length_scale, double signal_variance) {
  return KernelSpec{KernelFamily::Matern52, length_scale, signal_variance, 1.0, {}};
}

KernelSpec KernelSpec::matern32(double length_scale, double signal_variance) {
  return KernelSpec{KernelFamily::Matern32, length_scale, signal_variance, 1.0, {}};
}

KernelSpec KernelSpec::rational_quadratic(double length_scale, double signal_variance,
                                          double mixture) {
  return KernelSpec{KernelFamily::RationalQuadratic, length_scale, signal_variance, mixture, {}};
}

KernelSpec KernelSpec::sum(std::vector<KernelSpec> parts) {
  KernelSpec k;
  k.family = KernelFamily::Sum;
  k.children = std::move(parts);
  return k;
}

void KernelSpec::validate() const {
  if (family == KernelFamily::Sum) {
    if (children.size() < 2) throw InvalidArgument("sum kernel needs at least two children");
    for (const auto& c : children) c.validate();
    return;
  }
  if (!(length_scale > 0.0)) throw InvalidArgument("kernel length scale must be positive");
  if (!(signal_variance > 0.0)) throw InvalidArgument("kernel signal variance must be positive");
  if (family == KernelFamily::RationalQuadratic && !(rq_mixture > 0.0)) {
    throw InvalidArgument("rational quadratic mixture must be positive");
  }
}

double KernelSpec::total_variance() const noexcept {
  if (family != KernelFamily::Sum) return signal_variance;
  double s = 0.0;
  for (const auto& c : children) s += c.total_variance();
  return s;
}

double KernelSpec::at_distance(double r) const noexcept {
  switch (family) {
    case KernelFamily::Matern52: {
      const double s = 2.23606797749978969640917366873128 * r / length_scale;
      return signal_variance * (1.0 + s + s * s / 3.0) * std::exp(-s);
    }
    case KernelFamily::Matern32: {
      const double s = 1.73205080756887729352744634150587 * r / length_scale;
      return signal_variance * (1.0 + s) * std::exp(-s);
    }
    case KernelFamily::RationalQuadratic: {
      const double base = 1.0 + r * r / (2.0 * rq_mixture * length_scale * length_scale);
      return signal_variance * std::pow(base, -rq_mixture);
    }
    case KernelFamily::Sum: {
      double s = 0.0;
      for (const auto& c : children) s += c.at_distance(r);
      return s;
    }
  }
  return 0.0;
}

std::string KernelSpec::describe() const {
  std::ostringstream os;
  switch (family) {
    case KernelFamily::Matern52: os << "Matern52"; break;
    case KernelFamily::Matern32: os << "Matern32"; break;
    case KernelFamily::RationalQuadratic: os << "RQ(a=" << rq_mixture << ")"; break;
    case KernelFamily::Sum: {
      for (std::size_t i = 0; i < children.size(); ++i) {
        if (i) os << " + ";
        os << children[i].describe();
      }
      return os.str();
    }
  }
  os << "(l=" << length_scale << ", s2=" << signal_variance << ")";
  return os.str();
}

void KernelSpec::append_parameters(std::vector<double>& out) const {
  out.push_back(static_cast<double>(static_cast<int>(family)));
  if (family == KernelFamily::Sum) {
    out.push_back(static_cast<double>(children.size()));
    for (const auto& c : children) c.append_parameters(out);
    return;
  }
  out.push_back(length_scale);
  out.push_back(signal_variance);
  out.push_back(rq_mixture);
}

namespace {

double distance(std::span<const double> x, std::span<const double> y) {
  if (x.size() == 1) return std::abs(x[0] - y[0]);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

double eval_kernel(const KernelSpec& spec, std::span<const double> x, std::span<const double> x2) {
  if (x.size() != x2.size()) throw InvalidArgument("eval_kernel: dimension mismatch");
  return spec.at_distance(distance(x, x2));
}

double eval_kernel(const KernelSpec& spec, const Vec& x, const Vec& x2) {
  return eval_kernel(spec, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
                     std::span<const double>(x2.data(), static_cast<std::size_t>(x2.size())));
}

// ---------------------------------------------------------------------------
// ObservationOperator
// ---------------------------------------------------------------------------

const char* to_string(OperatorKind kind) noexcept {
  switch (kind) {
    case OperatorKind::Point: return "point";
    case OperatorKind::IntervalMean: return "interval";
    case OperatorKind::SmoothedGradient: return "gradient";
    case OperatorKind::DiskMean: return "disk";
  }
  return "?";
}

OperatorKind operator_kind_from_string(const std::string& text) {
  if (text == "point") return OperatorKind::Point;
  if (text == "interval") return OperatorKind::IntervalMean;
  if (text == "gradient") return OperatorKind::SmoothedGradient;
  if (text == "disk") return OperatorKind::DiskMean;
  throw InvalidArgument("unknown operator kind '" + text + "'");
}

ObservationOperator ObservationOperator::point(std::vector<double> x) {
  return {OperatorKind::Point, std::move(x), 0.0};
}

ObservationOperator ObservationOperator::interval_mean(double q, double w) {
  return {OperatorKind::IntervalMean, {q}, w};
}

ObservationOperator ObservationOperator::smoothed_gradient(double q, double w) {
  return {OperatorKind::SmoothedGradient, {q}, w};
}

ObservationOperator ObservationOperator::disk_mean(double qx, double qy, double r) {
  return {OperatorKind::DiskMean, {qx, qy}, r};
}

bool ObservationOperator::is_point_like() const noexcept {
  return kind == OperatorKind::Point ||
         ((kind == OperatorKind::IntervalMean || kind == OperatorKind::DiskMean) && width == 0.0);
}

double ObservationOperator::unit_response() const noexcept {
  return kind == OperatorKind::SmoothedGradient ? 0.0 : 1.0;
}

void ObservationOperator::validate(const Domain& domain) const {
  if (!(width >= 0.0)) throw InvalidArgument("operator width must be nonnegative");
  if (kind == OperatorKind::Point && width != 0.0) {
    throw InvalidArgument("point operator must have zero width");
  }
  if (kind == OperatorKind::SmoothedGradient && !(width > 0.0)) {
    throw InvalidArgument("smoothed gradient needs a positive filter width");
  }
  if ((kind == OperatorKind::IntervalMean || kind == OperatorKind::SmoothedGradient) && dim() != 1) {
    throw UnsupportedOperation(std::string(to_string(kind)) + " operator is one-dimensional");
  }
  if (kind == OperatorKind::DiskMean && dim() != 2) {
    throw UnsupportedOperation("disk operator is two-dimensional");
  }
  if (dim() != domain.dim()) throw UnsupportedOperation("operator and domain dimensions differ");
  if (!domain.contains(location, 1e-9)) throw InvalidArgument("operator location outside the domain");
}

void QuadratureOptions::validate() const {
  if (interval_nodes < 2) throw InvalidArgument("interval quadrature needs at least 2 nodes");
  if (disk_degree < 1) throw InvalidArgument("disk quadrature degree must be >= 1");
  if (!(gaussian_cutoff > 0.0)) throw InvalidArgument("gaussian cutoff must be positive");
}

// ---------------------------------------------------------------------------
// Functionals
// ---------------------------------------------------------------------------

namespace {

void add_gl(WeightedNodes& out, int n, double a, double b, double scale) {
  if (!(b > a)) return;
  const auto& [x, w] = gauss_legendre_reference(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (int i = 0; i < n; ++i) out.add(mid + half * x[i], scale * half * w[i]);
}

void add_interval(WeightedNodes& out, double a, double b, double scale, const Domain& domain,
                  int nodes) {
  for (const auto& piece : fold_interval(a, b, domain)) {
    if (piece.end > piece.start) {
      add_gl(out, nodes, piece.start, piece.end, scale * piece.weight);
    } else {
      out.add(piece.start, scale * piece.weight);
    }
  }
}

void fold_nodes(WeightedNodes& nodes, const Domain& domain) {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (int a = 0; a < nodes.dim; ++a) {
      double& c = nodes.coords[i * nodes.dim + a];
      c = domain.fold(a, c);
    }
  }
}

// Gaussian-derivative weights on Gauss–Legendre nodes over ±cutoff·w.
WeightedNodes gaussian_derivative_functional(double q, double w, const Domain& domain,
                                             const QuadratureOptions& quad) {
  if (domain.dim() != 1) throw UnsupportedOperation("gaussian smoothing is one-dimensional");
  if (!(w > 0.0)) throw InvalidArgument("gaussian smoothing needs a positive width");
  const double lo = domain.lower[0];
  const double hi = domain.upper[0];
  const double reach = quad.gaussian_cutoff * w;
  auto density = [&](double x) {
    const double z = (x - q) / w;
    return z * normal::pdf(z) / (w * w);
  };
  WeightedNodes out;
  out.dim = 1;
  if (domain.extension == Extension::Constant) {
    const double a = std::max(lo, q - reach);
    const double b = std::min(hi, q + reach);
    const auto& [x, wt] = gauss_legendre_reference(quad.interval_nodes);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    if (b > a) {
      for (int i = 0; i < quad.interval_nodes; ++i) {
        const double xi = mid + half * x[i];
        out.add(xi, half * wt[i] * density(xi));
      }
    }
    // Mass of the kernel beyond each edge sits on the edge value.
    if (q - reach < lo) {
      const double z = (lo - q) / w;
      out.add(lo, -normal::pdf(z) / w);
    }
    if (q + reach > hi) {
      const double z = (hi - q) / w;
      out.add(hi, normal::pdf(z) / w);
    }
    return out;
  }
  const auto& [x, wt] = gauss_legendre_reference(quad.interval_nodes);
  for (int i = 0; i < quad.interval_nodes; ++i) {
    const double xi = q + reach * x[i];
    out.add(xi, reach * wt[i] * density(xi));
  }
  fold_nodes(out, domain);
  return out;
}

}  // namespace

std::vector<IntervalPiece> fold_interval(double a, double b, const Domain& domain) {
  const double lo = domain.lower.at(0);
  const double hi = domain.upper.at(0);
  std::vector<IntervalPiece> pieces;
  if (!(b > a)) return pieces;
  if (domain.extension == Extension::Constant) {
    if (a < lo) pieces.push_back({lo, lo, std::min(b, lo) - a});
    if (std::min(b, hi) > std::max(a, lo)) pieces.push_back({std::max(a, lo), std::min(b, hi), 1.0});
    if (b > hi) pieces.push_back({hi, hi, b - std::max(a, hi)});
    return pieces;
  }
  const double len = hi - lo;
  double t = a;
  while (t < b) {
    const double k = std::floor((t - lo) / len);
    const double cell_start = lo + k * len;
    const double end = std::min(b, cell_start + len);
    const bool even = static_cast<long long>(k) % 2 == 0;
    auto map = [&](double x) { return even ? lo + (x - cell_start) : hi - (x - cell_start); };
    const double m0 = map(t);
    const double m1 = map(end);
    if (end > t) pieces.push_back({std::min(m0, m1), std::max(m0, m1), 1.0});
    t = end;
  }
  return pieces;
}

WeightedNodes to_functional(const ObservationOperator& op, const Domain& domain,
                            const QuadratureOptions& quad) {
  quad.validate();
  op.validate(domain);
  WeightedNodes out;
  out.dim = op.dim();
  if (op.is_point_like()) {
    out.add(op.location, 1.0);
    return out;
  }
  switch (op.kind) {
    case OperatorKind::IntervalMean: {
      const double q = op.location[0];
      add_interval(out, q - 0.5 * op.width, q + 0.5 * op.width, 1.0 / op.width, domain,
                   quad.interval_nodes);
      return out;
    }
    case OperatorKind::SmoothedGradient:
      return gaussian_derivative_functional(op.location[0], op.width, domain, quad);
    case OperatorKind::DiskMean: {
      auto rule = disk_quadrature_nodes(op.width, {op.location[0], op.location[1]}, quad.disk_degree,
                                        Normalization::Mean);
      fold_nodes(rule.nodes, domain);
      return std::move(rule.nodes);
    }
    case OperatorKind::Point: break;
  }
  throw UnsupportedOperation("unsupported operator kind");
}

double functional_cov(const KernelSpec& spec, const WeightedNodes& a, const WeightedNodes& b) {
  if (a.dim != b.dim) throw UnsupportedOperation("functionals live in different dimensions");
  double acc = 0.0;
  if (a.dim == 1) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double xi = a.coords[i];
      double row = 0.0;
      for (std::size_t j = 0; j < b.size(); ++j) {
        row += b.weights[j] * spec.at_distance(std::abs(xi - b.coords[j]));
      }
      acc += a.weights[i] * row;
    }
    return acc;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto xi = a.node(i);
    double row = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j) {
      row += b.weights[j] * spec.at_distance(distance(xi, b.node(j)));
    }
    acc += a.weights[i] * row;
  }
  return acc;
}

namespace {

bool leaf_has_antiderivatives(const KernelSpec& k) {
  switch (k.family) {
    case KernelFamily::Matern52:
    case KernelFamily::Matern32: return true;
    case KernelFamily::RationalQuadratic: return k.rq_mixture == 1.0;
    case KernelFamily::Sum:
      return std::all_of(k.children.begin(), k.children.end(), leaf_has_antiderivatives);
  }
  return false;
}

bool is_segment_operator(const ObservationOperator& op) {
  return op.dim() == 1 && (op.kind == OperatorKind::Point || op.kind == OperatorKind::IntervalMean);
}

// F(t) = ∫_0^t k(|u|) du (odd in t).
double first_antiderivative(const KernelSpec& k, double t) {
  const double sign = t < 0.0 ? -1.0 : 1.0;
  const double r = std::abs(t);
  switch (k.family) {
    case KernelFamily::Matern52: {
      const double lam = k.length_scale / std::sqrt(5.0);
      const double s = r / lam;
      return sign * k.signal_variance * lam *
             (8.0 / 3.0 - std::exp(-s) * (8.0 + 5.0 * s + s * s) / 3.0);
    }
    case KernelFamily::Matern32: {
      const double lam = k.length_scale / std::sqrt(3.0);
      const double s = r / lam;
      return sign * k.signal_variance * lam * (2.0 - std::exp(-s) * (2.0 + s));
    }
    case KernelFamily::RationalQuadratic: {
      const double c = k.length_scale * std::sqrt(2.0);
      return k.signal_variance * c * std::atan(t / c);
    }
    case KernelFamily::Sum: {
      double acc = 0.0;
      for (const auto& child : k.children) acc += first_antiderivative(child, t);
      return acc;
    }
  }
  return 0.0;
}

// G(t) = ∫_0^t F(u) du (even in t, G(t) ≈ k(0) t²/2 near 0).
double second_antiderivative(const KernelSpec& k, double t) {
  const double r = std::abs(t);
  switch (k.family) {
    case KernelFamily::Matern52: {
      const double lam = k.length_scale / std::sqrt(5.0);
      const double s = r / lam;
      double g;
      if (s < 0.05) {
        const double s2 = s * s;
        g = s2 * (0.5 + s2 * (-1.0 / 72.0 + s2 / 720.0) - s2 * s2 * s / 1890.0 +
                  s2 * s2 * s2 / 8064.0);
      } else {
        g = 8.0 * s / 3.0 - 5.0 + std::exp(-s) * (15.0 + 7.0 * s + s * s) / 3.0;
      }
      return k.signal_variance * lam * lam * g;
    }
    case KernelFamily::Matern32: {
      const double lam = k.length_scale / std::sqrt(3.0);
      const double s = r / lam;
      double g;
      if (s < 0.05) {
        const double s2 = s * s;
        g = s2 * (0.5 - s2 / 24.0 + s2 * s / 60.0 - s2 * s2 / 240.0 + s2 * s2 * s / 1260.0 -
                  s2 * s2 * s2 / 8064.0);
      } else {
        g = 2.0 * s - 3.0 + std::exp(-s) * (3.0 + s);
      }
      return k.signal_variance * lam * lam * g;
    }
    case KernelFamily::RationalQuadratic: {
      const double c = k.length_scale * std::sqrt(2.0);
      const double u = r / c;
      return k.signal_variance * c * c * (u * std::atan(u) - 0.5 * std::log1p(u * u));
    }
    case KernelFamily::Sum: {
      double acc = 0.0;
      for (const auto& child : k.children) acc += second_antiderivative(child, t);
      return acc;
    }
  }
  return 0.0;
}

std::vector<IntervalPiece> segment_pieces(const ObservationOperator& op, const Domain& domain) {
  if (op.is_point_like()) return {{op.location[0], op.location[0], 1.0}};
  const double q = op.location[0];
  auto pieces = fold_interval(q - 0.5 * op.width, q + 0.5 * op.width, domain);
  for (auto& p : pieces) p.weight /= op.width;
  return pieces;
}

double piece_cov(const KernelSpec& k, const IntervalPiece& a, const IntervalPiece& b) {
  const bool a_point = !(a.end > a.start);
  const bool b_point = !(b.end > b.start);
  const double wt = a.weight * b.weight;
  if (a_point && b_point) return wt * k.at_distance(std::abs(a.start - b.start));
  if (a_point || b_point) {
    const double p = a_point ? a.start : b.start;
    const auto& seg = a_point ? b : a;
    return wt * (first_antiderivative(k, seg.end - p) - first_antiderivative(k, seg.start - p));
  }
  return wt * (second_antiderivative(k, a.end - b.start) - second_antiderivative(k, a.start - b.start) -
               second_antiderivative(k, a.end - b.end) + second_antiderivative(k, a.start - b.end));
}

// ---------------------------------------------------------------------------
// 1-D densities integrated with the kernel's kink resolved
// ---------------------------------------------------------------------------

bool canonical_less(const ObservationOperator& a, const ObservationOperator& b) {
  if (a.kind != b.kind) return a.kind < b.kind;
  if (a.width != b.width) return a.width < b.width;
  return a.location < b.location;
}

enum class DensityShape { Uniform, Gaussian, GaussianDerivative };

// One folded piece of a 1-D operator. Domain coordinate u corresponds to the unfolded
// coordinate sign·u + offset; start == end marks a point mass of size `mass`.
struct DensityPiece {
  double start = 0.0;
  double end = 0.0;
  double sign = 1.0;
  double offset = 0.0;
  double mass = 0.0;

  [[nodiscard]] bool is_mass() const noexcept { return !(end > start); }
};

struct Density1D {
  DensityShape shape = DensityShape::Uniform;
  double center = 0.0;
  double scale = 1.0;  // interval width or Gaussian standard deviation
  std::vector<DensityPiece> pieces;

  [[nodiscard]] double at(const DensityPiece& p, double u) const {
    const double x = p.sign * u + p.offset;
    switch (shape) {
      case DensityShape::Uniform: return 1.0 / scale;
      case DensityShape::Gaussian: return normal::pdf((x - center) / scale) / scale;
      case DensityShape::GaussianDerivative: {
        const double z = (x - center) / scale;
        return z * normal::pdf(z) / (scale * scale);
      }
    }
    return 0.0;
  }
};

// [a, b] folded into the domain by reflection, each piece with its unfolding map.
std::vector<DensityPiece> reflect_pieces(double a, double b, double lo, double hi) {
  std::vector<DensityPiece> pieces;
  const double len = hi - lo;
  double t = a;
  while (t < b) {
    const double k = std::floor((t - lo) / len);
    const double cell_start = lo + k * len;
    const double end = std::min(b, cell_start + len);
    const bool even = static_cast<long long>(k) % 2 == 0;
    DensityPiece p;
    if (even) {
      p.start = lo + (t - cell_start);
      p.end = lo + (end - cell_start);
      p.offset = cell_start - lo;
    } else {
      p.start = hi - (end - cell_start);
      p.end = hi - (t - cell_start);
      p.sign = -1.0;
      p.offset = hi + cell_start;
    }
    if (p.end > p.start) pieces.push_back(p);
    t = end;
  }
  return pieces;
}

void gaussian_pieces(Density1D& d, const Domain& domain, const QuadratureOptions& quad) {
  const double q = d.center;
  const double w = d.scale;
  const double lo = domain.lower[0];
  const double hi = domain.upper[0];
  const double reach = quad.gaussian_cutoff * w;
  if (domain.extension == Extension::Reflect) {
    d.pieces = reflect_pieces(q - reach, q + reach, lo, hi);
    return;
  }
  const bool deriv = d.shape == DensityShape::GaussianDerivative;
  const double a = std::max(lo, q - reach);
  const double b = std::min(hi, q + reach);
  if (b > a) d.pieces.push_back({a, b, 1.0, 0.0, 0.0});
  // Kernel mass beyond each edge sits on the edge value.
  if (q - reach < lo) {
    const double z = (lo - q) / w;
    d.pieces.push_back({lo, lo, 1.0, 0.0, deriv ? -normal::pdf(z) / w : normal::cdf(z)});
  }
  if (q + reach > hi) {
    const double z = (hi - q) / w;
    d.pieces.push_back({hi, hi, 1.0, 0.0, deriv ? normal::pdf(z) / w : normal::cdf(-z)});
  }
}

Density1D density_of(const ObservationOperator& op, const Domain& domain,
                     const QuadratureOptions& quad) {
  Density1D d;
  if (op.is_point_like()) {
    d.pieces.push_back({op.location[0], op.location[0], 1.0, 0.0, 1.0});
    return d;
  }
  d.center = op.location[0];
  d.scale = op.width;
  switch (op.kind) {
    case OperatorKind::IntervalMean:
      for (const auto& p : fold_interval(d.center - 0.5 * d.scale, d.center + 0.5 * d.scale, domain)) {
        d.pieces.push_back({p.start, p.end, 1.0, 0.0, p.weight / d.scale});
      }
      return d;
    case OperatorKind::SmoothedGradient:
      d.shape = DensityShape::GaussianDerivative;
      gaussian_pieces(d, domain, quad);
      return d;
    default: break;
  }
  throw UnsupportedOperation(std::string(to_string(op.kind)) + " operator is not one-dimensional");
}

double smallest_length_scale(const KernelSpec& k) {
  if (k.family != KernelFamily::Sum) return k.length_scale;
  double m = std::numeric_limits<double>::infinity();
  for (const auto& c : k.children) m = std::min(m, smallest_length_scale(c));
  return m;
}

// Gauss–Legendre over [a, b] split at the interior breakpoints.
template <typename F>
double split_gl(double a, double b, std::vector<double>& cuts, int n, F&& f) {
  cuts.push_back(a);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  const auto& [x, w] = gauss_legendre_reference(n);
  double acc = 0.0;
  double prev = a;
  for (double c : cuts) {
    if (c <= prev || c > b) continue;
    const double half = 0.5 * (c - prev);
    const double mid = 0.5 * (c + prev);
    for (int i = 0; i < n; ++i) acc += half * w[i] * f(mid + half * x[i]);
    prev = c;
  }
  return acc;
}

// ∫ over piece p of ρ(v) k(|x − v|) dv, split where the kernel is not smooth.
double inner_cov(const KernelSpec& k, const Density1D& d, const DensityPiece& p, double x, int n,
                 double kink_scale) {
  if (p.is_mass()) return p.mass * k.at_distance(std::abs(x - p.start));
  std::vector<double> cuts;
  for (double c : {x - kink_scale, x, x + kink_scale}) {
    if (c > p.start && c < p.end) cuts.push_back(c);
  }
  return split_gl(p.start, p.end, cuts, n,
                  [&](double v) { return d.at(p, v) * k.at_distance(std::abs(x - v)); });
}

double density_cov(const KernelSpec& k, const Density1D& a, const Density1D& b, int n) {
  const double kink_scale = 4.0 * smallest_length_scale(k);
  double acc = 0.0;
  for (const auto& pa : a.pieces) {
    for (const auto& pb : b.pieces) {
      if (pa.is_mass()) {
        acc += pa.mass * inner_cov(k, b, pb, pa.start, n, kink_scale);
        continue;
      }
      if (pb.is_mass()) {
        acc += pb.mass * inner_cov(k, a, pa, pb.start, n, kink_scale);
        continue;
      }
      std::vector<double> cuts;
      for (double c : {pb.start, pb.end}) {
        if (c > pa.start && c < pa.end) cuts.push_back(c);
      }
      acc += split_gl(pa.start, pa.end, cuts, n, [&](double u) {
        return a.at(pa, u) * inner_cov(k, b, pb, u, n, kink_scale);
      });
    }
  }
  return acc;
}

}  // namespace

bool has_closed_form_cov(const KernelSpec& spec, const ObservationOperator& a,
                         const ObservationOperator& b) {
  return is_segment_operator(a) && is_segment_operator(b) && leaf_has_antiderivatives(spec);
}

double operator_cross_cov(const KernelSpec& spec, const ObservationOperator& a,
                          const ObservationOperator& b, const Domain& domain,
                          const QuadratureOptions& quad) {
  if (a.dim() != b.dim()) throw UnsupportedOperation("operators live in different dimensions");
  if (a.kind == OperatorKind::Point && b.kind == OperatorKind::Point) {
    a.validate(domain);
    b.validate(domain);
    return eval_kernel(spec, a.location, b.location);
  }
  if (has_closed_form_cov(spec, a, b)) {
    a.validate(domain);
    b.validate(domain);
    double acc = 0.0;
    for (const auto& pa : segment_pieces(a, domain)) {
      for (const auto& pb : segment_pieces(b, domain)) acc += piece_cov(spec, pa, pb);
    }
    return acc;
  }
  if (a.dim() == 1) {
    quad.validate();
    a.validate(domain);
    b.validate(domain);
    // A fixed argument order keeps the result exactly symmetric.
    const bool swap = canonical_less(b, a);
    return density_cov(spec, density_of(swap ? b : a, domain, quad),
                       density_of(swap ? a : b, domain, quad), quad.interval_nodes);
  }
  return functional_cov(spec, to_functional(a, domain, quad), to_functional(b, domain, quad));
}

double smoothing_cross_cov(const KernelSpec& spec, double q, double w, const ObservationOperator& b,
                           const Domain& domain, const QuadratureOptions& quad) {
  if (domain.dim() != 1 || b.dim() != 1) {
    throw UnsupportedOperation("gaussian smoothing is one-dimensional");
  }
  if (!(w > 0.0)) throw InvalidArgument("gaussian smoothing needs a positive width");
  quad.validate();
  b.validate(domain);
  Density1D a;
  a.shape = DensityShape::Gaussian;
  a.center = q;
  a.scale = w;
  gaussian_pieces(a, domain, quad);
  return density_cov(spec, a, density_of(b, domain, quad), quad.interval_nodes);
}

// ---------------------------------------------------------------------------
// CovarianceCache
// ---------------------------------------------------------------------------

namespace {

// True when the operator's functional does not depend on the domain boundary.
bool is_interior(const ObservationOperator& op, const Domain& domain, const QuadratureOptions& quad) {
  if (op.is_point_like()) return true;
  double reach = 0.0;
  switch (op.kind) {
    case OperatorKind::IntervalMean: reach = 0.5 * op.width; break;
    case OperatorKind::SmoothedGradient: reach = quad.gaussian_cutoff * op.width; break;
    case OperatorKind::DiskMean: reach = op.width; break;
    case OperatorKind::Point: break;
  }
  for (int a = 0; a < op.dim(); ++a) {
    if (op.location[a] - reach < domain.lower[a] || op.location[a] + reach > domain.upper[a]) {
      return false;
    }
  }
  return true;
}

void append_bytes(std::string& key, double v) {
  char buf[sizeof(double)];
  std::memcpy(buf, &v, sizeof(double));
  key.append(buf, sizeof(double));
}

std::string make_key(const KernelSpec& unit_spec, const ObservationOperator& a0,
                     const ObservationOperator& b0, const Domain& domain,
                     const QuadratureOptions& quad) {
  const bool swap = canonical_less(b0, a0);
  const auto& a = swap ? b0 : a0;
  const auto& b = swap ? a0 : b0;
  std::string key;
  key.reserve(256);
  std::vector<double> params;
  unit_spec.append_parameters(params);
  for (double p : params) append_bytes(key, p);
  append_bytes(key, quad.interval_nodes);
  append_bytes(key, quad.disk_degree);
  append_bytes(key, quad.gaussian_cutoff);
  append_bytes(key, static_cast<double>(a.kind));
  append_bytes(key, a.width);
  append_bytes(key, static_cast<double>(b.kind));
  append_bytes(key, b.width);
  if (is_interior(a, domain, quad) && is_interior(b, domain, quad)) {
    key.push_back('T');
    for (int i = 0; i < a.dim(); ++i) append_bytes(key, b.location[i] - a.location[i]);
  } else {
    key.push_back('A');
    for (int i = 0; i < domain.dim(); ++i) {
      append_bytes(key, domain.lower[i]);
      append_bytes(key, domain.upper[i]);
    }
    append_bytes(key, static_cast<double>(domain.extension));
    for (double v : a.location) append_bytes(key, v);
    for (double v : b.location) append_bytes(key, v);
  }
  return key;
}

}  // namespace

double CovarianceCache::cross_cov(const KernelSpec& spec, const ObservationOperator& a,
                                  const ObservationOperator& b, const Domain& domain,
                                  const QuadratureOptions& quad) {
  if (a.is_point_like() && b.is_point_like()) return operator_cross_cov(spec, a, b, domain, quad);
  // Single-family kernels are cached at unit variance.
  KernelSpec unit = spec;
  double scale = 1.0;
  if (spec.family != KernelFamily::Sum) {
    scale = spec.signal_variance;
    unit.signal_variance = 1.0;
  }
  const std::string key = make_key(unit, a, b, domain, quad);
  {
    std::lock_guard lock(mutex_);
    if (auto it = table_.find(key); it != table_.end()) {
      ++hits_;
      return scale * it->second;
    }
  }
  const double value = operator_cross_cov(unit, a, b, domain, quad);
  std::lock_guard lock(mutex_);
  if (table_.size() >= max_entries_) table_.clear();
  table_.emplace(key, value);
  return scale * value;
}

std::size_t CovarianceCache::size() const {
  std::lock_guard lock(mutex_);
  return table_.size();
}

std::size_t CovarianceCache::hits() const {
  std::lock_guard lock(mutex_);
  return hits_;
}

void CovarianceCache::clear() {
  std::lock_guard lock(mutex_);
  table_.clear();
  hits_ = 0;
}

}  // namespace gpdc
