#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ppconv {

/// Read-only view of a point in R^d; the span length is the dimension.
using PointView = std::span<const double>;

enum class Errc {
  ball_escapes_support,
  non_finite_density,
  mass_exceeds_reach,
  below_t0,
  nonpositive_minimum,
  infinite_intensity,
  ordering_violation,
  empty_neighborhood,
  unsupported_dimension,
  domain,
  insufficient_replicates,
  support_exceeded,
  empty_sample,
  margin_too_small,
  config,
  io,
};

const char* to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Volume of the d-dimensional unit ball.
inline double unit_ball_volume(int d) {
  return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

/// r^d by repeated multiplication, so that ipow(2r, d) == 2^d * ipow(r, d) exactly.
inline double ipow(double r, int d) {
  double out = 1.0;
  for (int i = 0; i < d; ++i) out *= r;
  return out;
}

inline double squared_distance(PointView a, PointView b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

inline double distance(PointView a, PointView b) { return std::sqrt(squared_distance(a, b)); }

/// Axis-aligned box [lo, hi] in R^d.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  Box() = default;
  Box(std::vector<double> lo_, std::vector<double> hi_);

  static Box cube(int dim, double lo, double hi);

  int dim() const { return static_cast<int>(lo.size()); }
  double volume() const;
  bool contains(PointView p) const;
  bool contains(const Box& other) const;
  /// Distance from an interior point to the boundary (0 when outside).
  double distance_to_boundary(PointView p) const;
  Box dilated(double margin) const;
  /// Smallest distance between the faces of `inner` and those of this box.
  double margin_around(const Box& inner) const;
};

}  // namespace ppconv
