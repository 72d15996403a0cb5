#include "ppconv/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace ppconv {
namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
using Gauss = boost::math::quadrature::gauss<double, 24>;

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr unsigned kMaxDepth = 14;

double checked(double value) {
  if (!std::isfinite(value)) {
    throw Error(Errc::non_finite_density, "density evaluated to a non-finite value");
  }
  return value;
}

void require_dim(const DensityModel& density, PointView p) {
  if (static_cast<int>(p.size()) != density.dim()) {
    throw Error(Errc::domain, "point dimension does not match the density");
  }
}

// Integral of max(0, a + b y) over [lo, hi].
double clipped_linear_integral(double a, double b, double lo, double hi) {
  if (hi <= lo) return 0.0;
  if (b == 0.0) return std::max(a, 0.0) * (hi - lo);
  const double root = -a / b;
  double p = lo;
  double q = hi;
  if (b > 0.0) {
    p = std::max(lo, root);
  } else {
    q = std::min(hi, root);
  }
  if (q <= p) return 0.0;
  return a * (q - p) + 0.5 * b * (q * q - p * p);
}

double ball_quadrature(const DensityModel& f, PointView x, double r) {
  const int d = f.dim();
  if (d == 1) {
    auto g = [&](double y) { return checked(f(std::span<const double>(&y, 1))); };
    return GK::integrate(g, x[0] - r, x[0] + r, kMaxDepth, 1e-11);
  }
  if (d == 2) {
    auto ring = [&](double rho) {
      if (rho == 0.0) return 0.0;
      auto angular = [&](double theta) {
        const std::array<double, 2> y{x[0] + rho * std::cos(theta), x[1] + rho * std::sin(theta)};
        return checked(f(y));
      };
      return rho * GK::integrate(angular, 0.0, kTwoPi, kMaxDepth, 1e-11);
    };
    return GK::integrate(ring, 0.0, r, kMaxDepth, 1e-10);
  }
  if (d == 3) {
    // Spherical product rule: Gauss in radius and polar cosine, trapezoid in
    // azimuth (spectrally accurate for periodic integrands).
    constexpr int kAzimuth = 48;
    double total = 0.0;
    const auto& nodes = Gauss::abscissa();
    const auto& weights = Gauss::weights();
    auto for_each_node = [&](auto&& fn) {
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        fn(nodes[i], weights[i]);
        if (nodes[i] != 0.0) fn(-nodes[i], weights[i]);
      }
    };
    for_each_node([&](double sr, double wr) {
      const double rho = 0.5 * r * (sr + 1.0);
      for_each_node([&](double cphi, double wphi) {
        const double sphi = std::sqrt(std::max(0.0, 1.0 - cphi * cphi));
        for (int k = 0; k < kAzimuth; ++k) {
          const double theta = kTwoPi * k / kAzimuth;
          const std::array<double, 3> y{x[0] + rho * sphi * std::cos(theta),
                                        x[1] + rho * sphi * std::sin(theta), x[2] + rho * cphi};
          total += wr * wphi * rho * rho * checked(f(y));
        }
      });
    });
    return total * 0.5 * r * (kTwoPi / kAzimuth);
  }
  throw Error(Errc::unsupported_dimension, "ball quadrature supports d <= 3");
}

double box_quadrature(const DensityModel& f, const Box& box) {
  const int d = f.dim();
  if (d == 1) {
    auto g = [&](double y) { return checked(f(std::span<const double>(&y, 1))); };
    return GK::integrate(g, box.lo[0], box.hi[0], kMaxDepth, 1e-11);
  }
  if (d == 2) {
    auto column = [&](double y0) {
      auto g = [&](double y1) {
        const std::array<double, 2> y{y0, y1};
        return checked(f(y));
      };
      return GK::integrate(g, box.lo[1], box.hi[1], kMaxDepth, 1e-11);
    };
    return GK::integrate(column, box.lo[0], box.hi[0], kMaxDepth, 1e-10);
  }
  if (d == 3) {
    const auto& nodes = Gauss::abscissa();
    const auto& weights = Gauss::weights();
    std::vector<std::pair<double, double>> rule;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      rule.emplace_back(nodes[i], weights[i]);
      if (nodes[i] != 0.0) rule.emplace_back(-nodes[i], weights[i]);
    }
    double total = 0.0;
    std::array<double, 3> half{}, mid{};
    for (int i = 0; i < 3; ++i) {
      half[i] = 0.5 * (box.hi[i] - box.lo[i]);
      mid[i] = 0.5 * (box.hi[i] + box.lo[i]);
    }
    for (auto [a, wa] : rule) {
      for (auto [b, wb] : rule) {
        for (auto [c, wc] : rule) {
          const std::array<double, 3> y{mid[0] + half[0] * a, mid[1] + half[1] * b, mid[2] + half[2] * c};
          total += wa * wb * wc * checked(f(y));
        }
      }
    }
    return total * half[0] * half[1] * half[2];
  }
  throw Error(Errc::unsupported_dimension, "box quadrature supports d <= 3");
}

double triangle_quadrature(const DensityModel& f, const std::array<double, 2>& a,
                           const std::array<double, 2>& b, const std::array<double, 2>& c) {
  // Collapsed-square map p(s, w) = a + s (b - a) + s w (c - b), |J| = 2 |T| s.
  const double twice_area =
      std::abs((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
  auto outer = [&](double s) {
    auto inner = [&](double w) {
      const std::array<double, 2> y{a[0] + s * (b[0] - a[0]) + s * w * (c[0] - b[0]),
                                    a[1] + s * (b[1] - a[1]) + s * w * (c[1] - b[1])};
      return checked(f(y));
    };
    return s * GK::integrate(inner, 0.0, 1.0, kMaxDepth, 1e-11);
  };
  return twice_area * GK::integrate(outer, 0.0, 1.0, kMaxDepth, 1e-10);
}

}  // namespace

// ---------------------------------------------------------------------------
// DensityModel

DensityModel DensityModel::constant(int dim, double c, Box support) {
  if (support.dim() != dim) throw Error(Errc::domain, "support dimension mismatch");
  if (!(c >= 0.0) || !std::isfinite(c)) throw Error(Errc::domain, "constant density must be finite and >= 0");
  DensityModel m;
  m.dim_ = dim;
  m.support_ = std::move(support);
  m.f_min_ = c;
  m.f_max_ = c;
  m.lipschitz_ = 0.0;
  m.name_ = "constant";
  m.kind_ = Constant{c};
  return m;
}

DensityModel DensityModel::linear(int dim, double a, double b, Box support) {
  if (support.dim() != dim) throw Error(Errc::domain, "support dimension mismatch");
  if (!std::isfinite(a) || !std::isfinite(b)) throw Error(Errc::domain, "linear density needs finite a, b");
  DensityModel m;
  m.dim_ = dim;
  const double v0 = std::max(0.0, a + b * support.lo[0]);
  const double v1 = std::max(0.0, a + b * support.hi[0]);
  m.support_ = std::move(support);
  m.f_min_ = std::min(v0, v1);
  m.f_max_ = std::max(v0, v1);
  m.lipschitz_ = std::abs(b);
  m.name_ = "linear";
  m.kind_ = Linear{a, b};
  return m;
}

DensityModel DensityModel::step(Box support, std::vector<int> cells, std::vector<double> values) {
  if (static_cast<int>(cells.size()) != support.dim()) {
    throw Error(Errc::domain, "step density needs one cell count per axis");
  }
  std::size_t total = 1;
  for (int n : cells) {
    if (n < 1) throw Error(Errc::domain, "step density cell counts must be >= 1");
    total *= static_cast<std::size_t>(n);
  }
  if (values.size() != total) throw Error(Errc::domain, "step density value count mismatch");
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error(Errc::domain, "step values must be finite and >= 0");
  }
  DensityModel m;
  m.dim_ = support.dim();
  m.support_ = std::move(support);
  m.f_min_ = *std::min_element(values.begin(), values.end());
  m.f_max_ = *std::max_element(values.begin(), values.end());
  m.name_ = "step";
  m.kind_ = Step{std::move(cells), std::move(values)};
  return m;
}

DensityModel DensityModel::custom(int dim, Function f, Box support, double f_min, double f_max,
                                  std::optional<double> lipschitz, std::string name) {
  if (support.dim() != dim) throw Error(Errc::domain, "support dimension mismatch");
  if (!(f_min >= 0.0) || !(f_max >= f_min) || !std::isfinite(f_max)) {
    throw Error(Errc::domain, "custom density needs 0 <= f_min <= f_max < inf");
  }
  DensityModel m;
  m.dim_ = dim;
  m.support_ = std::move(support);
  m.f_min_ = f_min;
  m.f_max_ = f_max;
  m.lipschitz_ = lipschitz;
  m.name_ = std::move(name);
  m.kind_ = Custom{std::move(f)};
  return m;
}

std::string DensityModel::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << name_;
  if (const auto* c = std::get_if<Constant>(&kind_)) os << " c=" << c->c;
  if (const auto* l = std::get_if<Linear>(&kind_)) os << " a=" << l->a << " b=" << l->b;
  if (const auto* s = std::get_if<Step>(&kind_)) {
    os << " values=[";
    for (std::size_t i = 0; i < s->values.size(); ++i) os << (i ? "," : "") << s->values[i];
    os << "]";
  }
  if (scale_ != 1.0) os << " scale=" << scale_;
  return os.str();
}

double DensityModel::step_value(PointView y) const {
  const auto& s = std::get<Step>(kind_);
  std::size_t index = 0;
  std::size_t stride = 1;
  for (int i = 0; i < dim_; ++i) {
    const double width = (support_.hi[i] - support_.lo[i]) / s.cells[i];
    const auto raw = static_cast<long>(std::floor((y[i] - support_.lo[i]) / width));
    const long cell = std::clamp<long>(raw, 0, s.cells[i] - 1);
    index += static_cast<std::size_t>(cell) * stride;
    stride *= static_cast<std::size_t>(s.cells[i]);
  }
  return s.values[index];
}

double DensityModel::operator()(PointView y) const {
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Constant>) {
          return scale_ * k.c;
        } else if constexpr (std::is_same_v<K, Linear>) {
          return scale_ * std::max(0.0, k.a + k.b * y[0]);
        } else if constexpr (std::is_same_v<K, Step>) {
          return scale_ * step_value(y);
        } else {
          return scale_ * k.f(y);
        }
      },
      kind_);
}

std::optional<double> DensityModel::step_mass_1d(double lo, double hi) const {
  const auto& s = std::get<Step>(kind_);
  const double width = (support_.hi[0] - support_.lo[0]) / s.cells[0];
  double total = 0.0;
  for (int i = 0; i < s.cells[0]; ++i) {
    const double a = support_.lo[0] + i * width;
    const double b = (i + 1 == s.cells[0]) ? support_.hi[0] : a + width;
    const double overlap = std::min(hi, b) - std::max(lo, a);
    if (overlap > 0.0) total += s.values[static_cast<std::size_t>(i)] * overlap;
  }
  return scale_ * total;
}

std::optional<double> DensityModel::closed_form_ball_mass(PointView center, double r) const {
  const double kd = unit_ball_volume(dim_);
  if (const auto* c = std::get_if<Constant>(&kind_)) {
    return (scale_ * c->c * kd) * ipow(r, dim_);
  }
  if (const auto* l = std::get_if<Linear>(&kind_)) {
    const double fx = l->a + l->b * center[0];
    const double spread = std::abs(l->b) * r;
    if (fx - spread >= 0.0) return (scale_ * fx * kd) * ipow(r, dim_);
    if (fx + spread <= 0.0) return 0.0;
    if (dim_ == 1) return scale_ * clipped_linear_integral(l->a, l->b, center[0] - r, center[0] + r);
    return std::nullopt;
  }
  if (std::holds_alternative<Step>(kind_) && dim_ == 1) {
    return step_mass_1d(center[0] - r, center[0] + r);
  }
  return std::nullopt;
}

std::optional<double> DensityModel::closed_form_inverse(PointView center, double mass) const {
  const double kd = unit_ball_volume(dim_);
  if (const auto* c = std::get_if<Constant>(&kind_)) {
    const double k = scale_ * c->c * kd;
    if (k <= 0.0) return std::nullopt;
    return std::pow(mass / k, 1.0 / dim_);
  }
  if (const auto* l = std::get_if<Linear>(&kind_)) {
    const double fx = l->a + l->b * center[0];
    if (fx <= 0.0) return std::nullopt;
    const double r = std::pow(mass / (scale_ * fx * kd), 1.0 / dim_);
    if (fx - std::abs(l->b) * r >= 0.0) return r;
  }
  return std::nullopt;
}

DensityModel DensityModel::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw Error(Errc::domain, "scale factor must be positive");
  DensityModel m = *this;
  m.scale_ *= factor;
  m.f_min_ *= factor;
  m.f_max_ *= factor;
  if (m.lipschitz_) *m.lipschitz_ *= factor;
  return m;
}

// ---------------------------------------------------------------------------
// Windows

bool ConvexPolygon::contains(PointView p) const {
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = vertices[i];
    const auto& b = vertices[(i + 1) % n];
    const double cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
    if (cross < 0.0) return false;
  }
  return true;
}

double ConvexPolygon::area() const {
  double s = 0.0;
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = vertices[i];
    const auto& b = vertices[(i + 1) % n];
    s += a[0] * b[1] - a[1] * b[0];
  }
  return 0.5 * s;
}

Box ConvexPolygon::bounding_box() const {
  std::vector<double> lo{vertices[0][0], vertices[0][1]};
  std::vector<double> hi = lo;
  for (const auto& v : vertices) {
    for (int i = 0; i < 2; ++i) {
      lo[i] = std::min(lo[i], v[i]);
      hi[i] = std::max(hi[i], v[i]);
    }
  }
  return Box(lo, hi);
}

Window::Window(Box box) : region_(std::move(box)) {}

Window::Window(ConvexPolygon polygon) : region_(std::move(polygon)) {
  const auto& p = std::get<ConvexPolygon>(region_);
  if (p.vertices.size() < 3) throw Error(Errc::domain, "polygon window needs >= 3 vertices");
  const std::size_t n = p.vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = p.vertices[i];
    const auto& b = p.vertices[(i + 1) % n];
    const auto& c = p.vertices[(i + 2) % n];
    const double cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
    if (cross <= 0.0) throw Error(Errc::domain, "polygon window must be strictly convex and counter-clockwise");
  }
}

int Window::dim() const { return is_box() ? box().dim() : 2; }

bool Window::contains(PointView p) const {
  return std::visit([&](const auto& r) { return r.contains(p); }, region_);
}

Box Window::bounding_box() const { return is_box() ? box() : polygon().bounding_box(); }

std::string Window::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (is_box()) {
    os << "box lo=[";
    for (int i = 0; i < box().dim(); ++i) os << (i ? "," : "") << box().lo[i];
    os << "] hi=[";
    for (int i = 0; i < box().dim(); ++i) os << (i ? "," : "") << box().hi[i];
    os << "]";
  } else {
    os << "polygon [";
    for (std::size_t i = 0; i < polygon().vertices.size(); ++i) {
      os << (i ? "," : "") << "(" << polygon().vertices[i][0] << "," << polygon().vertices[i][1] << ")";
    }
    os << "]";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Operations

double ball_measure(const DensityModel& density, PointView center, double radius) {
  require_dim(density, center);
  if (!(radius >= 0.0) || !std::isfinite(radius)) throw Error(Errc::domain, "radius must be finite and >= 0");
  if (radius == 0.0) return 0.0;
  const double reach = density.support().distance_to_boundary(center);
  if (radius > reach + 1e-12 * std::max(1.0, radius)) {
    throw Error(Errc::ball_escapes_support, "ball leaves the support box of the density");
  }
  if (auto exact = density.closed_form_ball_mass(center, radius)) return *exact;
  return ball_quadrature(density, center, radius);
}

double invert_ball_measure(const DensityModel& density, PointView center, double mass) {
  require_dim(density, center);
  if (!(mass >= 0.0) || !std::isfinite(mass)) throw Error(Errc::domain, "mass must be finite and >= 0");
  if (mass == 0.0) return 0.0;
  const double r_max = density.support().distance_to_boundary(center);
  if (auto exact = density.closed_form_inverse(center, mass)) {
    if (*exact <= r_max) return *exact;
    throw Error(Errc::mass_exceeds_reach, "mass exceeds mu(B(x, r_max))");
  }
  const double reach = ball_measure(density, center, r_max);
  if (mass > reach) throw Error(Errc::mass_exceeds_reach, "mass exceeds mu(B(x, r_max))");
  double lo = 0.0;
  double hi = r_max;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (ball_measure(density, center, mid) < mass) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double threshold_radius_bound(const DensityModel& density, double u, double t) {
  const int d = density.dim();
  const double level = u + std::log(t);
  return std::pow(level / (std::ldexp(1.0, d) * density.f_min() * unit_ball_volume(d) * t), 1.0 / d);
}

ThresholdRadii threshold_radii(const DensityModel& density, PointView center, double u, double t) {
  require_dim(density, center);
  if (!(t > 0.0)) throw Error(Errc::domain, "t must be positive");
  const double level = u + std::log(t);
  if (!(level > 0.0)) throw Error(Errc::domain, "threshold radii need u + log t > 0");
  if (!(density.f_min() > 0.0)) throw Error(Errc::domain, "threshold radii need f_min > 0");
  const double target = level / t;
  try {
    const double v = 0.5 * invert_ball_measure(density, center, target);
    const double q = invert_ball_measure(density, center, target / std::ldexp(1.0, density.dim()));
    return {v, q};
  } catch (const Error& e) {
    if (e.code() != Errc::mass_exceeds_reach) throw;
    std::ostringstream os;
    os << "no solution inside the support at x=(";
    for (std::size_t i = 0; i < center.size(); ++i) os << (i ? "," : "") << center[i];
    os << "), u=" << u << ", t=" << t << " (t is below t0)";
    throw Error(Errc::below_t0, os.str());
  }
}

namespace {

// Coarse grid scan of the region followed by local refinement around the
// best point. `sign` = +1 finds the minimum, -1 the maximum.
double refined_extreme(const DensityModel& f, const Window& region, double sign, double* coarse_spacing) {
  const Box bb = region.bounding_box();
  const int d = bb.dim();
  constexpr int kCoarse = 33;
  constexpr int kLocal = 9;
  std::vector<double> best_point(static_cast<std::size_t>(d));
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> y(static_cast<std::size_t>(d));
  std::vector<double> spacing(static_cast<std::size_t>(d));
  double max_spacing = 0.0;
  for (int i = 0; i < d; ++i) {
    spacing[i] = (bb.hi[i] - bb.lo[i]) / (kCoarse - 1);
    max_spacing = std::max(max_spacing, spacing[i]);
  }
  *coarse_spacing = max_spacing;

  auto consider = [&](const std::vector<double>& p) {
    if (!region.contains(p)) return;
    const double v = sign * checked(f(p));
    if (v < best) {
      best = v;
      best_point = p;
    }
  };
  auto scan = [&](const std::vector<double>& origin, const std::vector<double>& step, int n) {
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    while (true) {
      for (int i = 0; i < d; ++i) y[i] = std::clamp(origin[i] + idx[i] * step[i], bb.lo[i], bb.hi[i]);
      consider(y);
      int axis = 0;
      while (axis < d && ++idx[axis] == n) idx[axis++] = 0;
      if (axis == d) break;
    }
  };

  scan(bb.lo, spacing, kCoarse);
  if (!region.is_box()) {
    for (const auto& v : region.polygon().vertices) consider({v[0], v[1]});
  }
  if (!std::isfinite(best)) throw Error(Errc::domain, "region contains no grid points");
  for (int level = 0; level < 4; ++level) {
    std::vector<double> origin(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
      origin[i] = best_point[i] - spacing[i];
      spacing[i] = 2.0 * spacing[i] / (kLocal - 1);
    }
    scan(origin, spacing, kLocal);
  }
  return sign * best;
}

}  // namespace

DensityBounds density_bounds(const DensityModel& density, const Window& region) {
  if (region.dim() != density.dim()) throw Error(Errc::domain, "region dimension mismatch");
  if (!density.support().contains(region.bounding_box())) {
    throw Error(Errc::support_exceeded, "region must lie inside the density support");
  }
  double h = 0.0;
  double beta = refined_extreme(density, region, +1.0, &h);
  double sup = refined_extreme(density, region, -1.0, &h);
  beta = std::clamp(beta, density.f_min(), density.f_max());
  sup = std::clamp(sup, density.f_min(), density.f_max());
  if (!(beta > 0.0)) throw Error(Errc::nonpositive_minimum, "density minimum over the region is not positive");
  DensityBounds out{beta, sup, density.f_min(), density.f_max()};
  if (auto lip = density.lipschitz()) {
    const double slack = *lip * h * std::sqrt(static_cast<double>(density.dim())) / 2.0;
    out.beta_lower = std::max(density.f_min(), beta - slack);
    out.sup_upper = std::min(density.f_max(), sup + slack);
  }
  return out;
}

double region_mass(const DensityModel& density, const Window& region) {
  if (region.dim() != density.dim()) throw Error(Errc::domain, "region dimension mismatch");
  const int d = density.dim();
  if (region.is_box()) {
    const Box& box = region.box();
    std::vector<double> mid(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) mid[i] = 0.5 * (box.lo[i] + box.hi[i]);
    if (density.is_affine()) {
      // Linear in y_1 and unclipped on the box: mass = f(center) * volume.
      const std::vector<double> lo_corner = box.lo;
      std::vector<double> hi_corner = box.lo;
      hi_corner[0] = box.hi[0];
      if (density(lo_corner) > 0.0 && density(hi_corner) > 0.0) return density(mid) * box.volume();
    }
    if (density.is_step() && d == 1) {
      const double half = 0.5 * (box.hi[0] - box.lo[0]);
      if (auto exact = density.closed_form_ball_mass(mid, half)) return *exact;
    }
    return box_quadrature(density, box);
  }
  const auto& poly = region.polygon();
  double total = 0.0;
  for (std::size_t i = 1; i + 1 < poly.vertices.size(); ++i) {
    total += triangle_quadrature(density, poly.vertices[0], poly.vertices[i], poly.vertices[i + 1]);
  }
  return total;
}

}  // namespace ppconv
