#include "ppconv/voronoi.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "ppconv/rng.hpp"

namespace ppconv {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kArcSlack = 1e-12;
constexpr double kRadiusTolerance = 1e-11;

void require_planar(int d) {
  if (d < 1 || d > 2) throw Error(Errc::unsupported_dimension, "cell coverage is implemented for d in {1, 2}");
}

}  // namespace

// ---------------------------------------------------------------------------
// Neighborhood

void Neighborhood::add(PointView offset) {
  offsets_.insert(offsets_.end(), offset.begin(), offset.end());
  double s = 0.0;
  for (double v : offset) s += v * v;
  dist_.push_back(std::sqrt(s));
}

void Neighborhood::finalize() {
  std::vector<std::size_t> order(dist_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist_[a] < dist_[b]; });
  std::vector<double> offsets;
  std::vector<double> dist;
  offsets.reserve(offsets_.size());
  dist.reserve(dist_.size());
  for (std::size_t i : order) {
    const auto o = offset(i);
    offsets.insert(offsets.end(), o.begin(), o.end());
    dist.push_back(dist_[i]);
  }
  offsets_ = std::move(offsets);
  dist_ = std::move(dist);
}

std::size_t Neighborhood::count_within(double r) const {
  return static_cast<std::size_t>(std::upper_bound(dist_.begin(), dist_.end(), r) - dist_.begin());
}

Neighborhood Neighborhood::from_config(PointView x, const PointConfig& config) {
  Neighborhood n(config.dim());
  std::vector<double> o(static_cast<std::size_t>(config.dim()));
  for (std::size_t p = 0; p < config.size(); ++p) {
    bool same = true;
    for (int i = 0; i < config.dim(); ++i) {
      o[i] = config[p][i] - x[i];
      if (o[i] != 0.0) same = false;
    }
    if (!same) n.add(o);
  }
  n.finalize();
  return n;
}

Neighborhood Neighborhood::from_grid(PointView x, const SpatialGrid& grid, double radius, std::size_t self) {
  const auto& config = grid.config();
  Neighborhood n(config.dim());
  std::vector<std::size_t> hits;
  grid.within(x, radius, hits, self);
  std::vector<double> o(static_cast<std::size_t>(config.dim()));
  for (std::size_t p : hits) {
    bool same = true;
    for (int i = 0; i < config.dim(); ++i) {
      o[i] = config[p][i] - x[i];
      if (o[i] != 0.0) same = false;
    }
    if (!same) n.add(o);
  }
  n.finalize();
  return n;
}

// ---------------------------------------------------------------------------
// Caps

CapSet build_caps(const Neighborhood& neighbors, double R) {
  require_planar(neighbors.dim());
  CapSet caps;
  caps.dim = neighbors.dim();
  const std::size_t m = neighbors.count_within(2.0 * R);
  for (std::size_t j = 0; j < m; ++j) {
    const auto o = neighbors.offset(j);
    if (caps.dim == 1) {
      (o[0] > 0.0 ? caps.right : caps.left) = true;
    } else {
      const double ratio = std::min(1.0, neighbors.distance(j) / (2.0 * R));
      caps.arcs.push_back({std::atan2(o[1], o[0]), std::acos(ratio)});
    }
  }
  return caps;
}

bool covers_sphere(const CapSet& caps) {
  if (caps.dim == 1) return caps.left && caps.right;
  if (caps.arcs.empty()) return false;
  // Unroll each arc to [s, s + 2w] with s in [0, 2pi) plus a copy shifted by
  // -2pi, then sweep [0, 2pi].
  std::vector<std::pair<double, double>> spans;
  spans.reserve(2 * caps.arcs.size());
  for (const auto& a : caps.arcs) {
    if (a.half_width >= kPi) return true;
    double s = std::fmod(a.center - a.half_width, kTwoPi);
    if (s < 0.0) s += kTwoPi;
    const double e = s + 2.0 * a.half_width;
    spans.emplace_back(s, e);
    spans.emplace_back(s - kTwoPi, e - kTwoPi);
  }
  std::sort(spans.begin(), spans.end());
  double reach = 0.0;
  bool started = false;
  for (const auto& [s, e] : spans) {
    if (e < reach) continue;
    if (s > reach + kArcSlack) return false;
    if (!started && s > kArcSlack) return false;
    started = true;
    reach = std::max(reach, e);
    if (reach >= kTwoPi - kArcSlack) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Radii

double inradius(PointView x, const PointConfig& config) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < config.size(); ++p) {
    const double d2 = squared_distance(x, config[p]);
    if (d2 > 0.0) best = std::min(best, d2);
  }
  if (!std::isfinite(best)) throw Error(Errc::empty_neighborhood, "inradius needs a point other than x");
  return 0.5 * std::sqrt(best);
}

double inradius(PointView x, const SpatialGrid& grid, std::size_t self) {
  const auto nn = grid.nearest(x, self);
  // x itself present under another index: fall back to the exhaustive scan.
  if (nn && nn->distance == 0.0) return inradius(x, grid.config());
  if (!nn) throw Error(Errc::empty_neighborhood, "inradius needs a point other than x");
  return 0.5 * nn->distance;
}

bool cell_contained_in_ball(const Neighborhood& neighbors, double R) {
  require_planar(neighbors.dim());
  if (!(R > 0.0)) return false;
  return covers_sphere(build_caps(neighbors, R));
}

bool cell_contained_in_ball(PointView x, const PointConfig& config, double R) {
  require_planar(config.dim());
  return cell_contained_in_ball(Neighborhood::from_config(x, config), R);
}

Boundedness cell_boundedness(const Neighborhood& neighbors) {
  require_planar(neighbors.dim());
  if (neighbors.dim() == 1) {
    bool left = false;
    bool right = false;
    for (std::size_t j = 0; j < neighbors.size(); ++j) {
      (neighbors.offset(j)[0] > 0.0 ? right : left) = true;
    }
    return {left && right, false};
  }
  if (neighbors.size() < 3) return {false, false};
  std::vector<double> angles;
  angles.reserve(neighbors.size());
  for (std::size_t j = 0; j < neighbors.size(); ++j) {
    const auto o = neighbors.offset(j);
    angles.push_back(std::atan2(o[1], o[0]));
  }
  std::sort(angles.begin(), angles.end());
  double widest = angles.front() + kTwoPi - angles.back();
  for (std::size_t j = 1; j < angles.size(); ++j) widest = std::max(widest, angles[j] - angles[j - 1]);
  // Open half-circles around each direction cover the circle iff every gap
  // between consecutive directions is shorter than pi.
  return {widest < kPi, std::abs(widest - kPi) <= 1e-12};
}

Boundedness cell_boundedness(PointView x, const PointConfig& neighbors) {
  require_planar(neighbors.dim());
  return cell_boundedness(Neighborhood::from_config(x, neighbors));
}

bool is_cell_bounded(PointView x, const PointConfig& neighbors) {
  return cell_boundedness(x, neighbors).bounded;
}

namespace {

// Largest |v| over cell vertices v, using the neighbors within 2R. In d = 2
// a vertex is the circumcenter of x and two neighbors that no neighbor beats.
double farthest_vertex(const Neighborhood& neighbors, double R) {
  const std::size_t m = neighbors.count_within(2.0 * R * (1.0 + 1e-9));
  if (neighbors.dim() == 1) {
    double left = kUnbounded;
    double right = kUnbounded;
    for (std::size_t j = 0; j < m; ++j) {
      const double o = neighbors.offset(j)[0];
      (o > 0.0 ? right : left) = std::min(o > 0.0 ? right : left, 0.5 * std::abs(o));
    }
    return std::max(left, right);
  }
  double best = -1.0;
  for (std::size_t a = 0; a < m; ++a) {
    const auto p = neighbors.offset(a);
    const double pa = 0.5 * (p[0] * p[0] + p[1] * p[1]);
    for (std::size_t b = a + 1; b < m; ++b) {
      const auto q = neighbors.offset(b);
      const double det = p[0] * q[1] - p[1] * q[0];
      if (std::abs(det) < 1e-300) continue;
      const double qb = 0.5 * (q[0] * q[0] + q[1] * q[1]);
      const double v0 = (pa * q[1] - qb * p[1]) / det;
      const double v1 = (p[0] * qb - q[0] * pa) / det;
      const double norm = std::hypot(v0, v1);
      if (norm <= best) continue;
      bool vertex = true;
      for (std::size_t j = 0; j < m && vertex; ++j) {
        const auto y = neighbors.offset(j);
        const double half = 0.5 * (y[0] * y[0] + y[1] * y[1]);
        vertex = v0 * y[0] + v1 * y[1] <= half + 1e-12 * (norm * neighbors.distance(j) + half);
      }
      if (vertex) best = norm;
    }
  }
  return best < 0.0 ? kUnbounded : best;
}

}  // namespace

double circumradius(const Neighborhood& neighbors, double lower_bound) {
  require_planar(neighbors.dim());
  if (neighbors.size() == 0 || !cell_boundedness(neighbors).bounded) return kUnbounded;
  double lo = std::max(lower_bound, 0.5 * neighbors.distance(0));
  double hi = std::max(lo, 1e-300) * 2.0;
  // A bounded cell is covered at some finite R; the cap only trips for
  // nuclei numerically on the hull boundary.
  const double far = neighbors.distance(neighbors.size() - 1);
  while (!cell_contained_in_ball(neighbors, hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6 * std::max(1.0, far)) return kUnbounded;
  }
  while (hi - lo > kRadiusTolerance) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (cell_contained_in_ball(neighbors, mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  const double approx = 0.5 * (lo + hi);
  const double exact = farthest_vertex(neighbors, hi);
  // the arc slack leaves a relative error near tangency; keep the vertex when it agrees
  return std::abs(exact - approx) <= 1e-6 * std::max(1.0, approx) ? exact : approx;
}

double circumradius(PointView x, const PointConfig& config) {
  require_planar(config.dim());
  const auto neighbors = Neighborhood::from_config(x, config);
  if (neighbors.size() == 0) return kUnbounded;
  return circumradius(neighbors, 0.5 * neighbors.distance(0));
}

// ---------------------------------------------------------------------------
// p_k and alpha_2

Estimate estimate_p_k(int d, int k, std::size_t n_samples, std::uint64_t seed) {
  require_planar(d);
  if (k < d + 1) throw Error(Errc::domain, "p_k needs k >= d + 1");
  if (n_samples == 0) throw Error(Errc::domain, "p_k needs at least one sample");
  Philox4x32 rng(seed, 0);
  std::size_t hits = 0;
  std::vector<double> y(static_cast<std::size_t>(d));
  for (std::size_t s = 0; s < n_samples; ++s) {
    Neighborhood n(d);
    for (int j = 0; j < k; ++j) {
      double r2 = 0.0;
      do {
        r2 = 0.0;
        for (int i = 0; i < d; ++i) {
          y[i] = 4.0 * rng.uniform() - 2.0;
          r2 += y[i] * y[i];
        }
      } while (r2 >= 4.0 || r2 == 0.0);
      n.add(y);
    }
    n.finalize();
    if (cell_contained_in_ball(n, 1.0)) ++hits;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(n_samples);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n_samples))};
}

double alpha2(int d, double p) {
  if (d < 1) throw Error(Errc::domain, "alpha2 needs d >= 1");
  if (!(p > 0.0) || p > 1.0) throw Error(Errc::domain, "alpha2 needs p in (0, 1]");
  double factorial = 1.0;
  for (int i = 2; i <= d + 1; ++i) factorial *= i;
  return std::pow(std::ldexp(1.0, d * (d + 1)) / factorial * p, 1.0 / (d + 1));
}

}  // namespace ppconv
