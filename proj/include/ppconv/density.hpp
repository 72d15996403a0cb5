#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ppconv/common.hpp"

namespace ppconv {

/// Density f of the base measure mu, declared on an open axis-aligned support
/// box A. Immutable; safe to share across replicate workers.
class DensityModel {
 public:
  using Function = std::function<double(PointView)>;

  /// f == c on A.
  static DensityModel constant(int dim, double c, Box support);
  /// f(y) = max(0, a + b * y_1) on A.
  static DensityModel linear(int dim, double a, double b, Box support);
  /// Piecewise constant on a regular grid over `support`; `cells` gives the
  /// number of cells per axis and `values` is row-major with axis 0 fastest.
  static DensityModel step(Box support, std::vector<int> cells, std::vector<double> values);
  /// Arbitrary density with declared bounds on A.
  static DensityModel custom(int dim, Function f, Box support, double f_min, double f_max,
                             std::optional<double> lipschitz = std::nullopt,
                             std::string name = "custom");

  int dim() const { return dim_; }
  const Box& support() const { return support_; }
  double f_min() const { return f_min_; }
  double f_max() const { return f_max_; }
  std::optional<double> lipschitz() const { return lipschitz_; }
  const std::string& name() const { return name_; }
  /// Short parameter description, e.g. "linear a=0.66 b=0.66".
  std::string describe() const;

  double operator()(PointView y) const;

  /// mu(B(center, r)) when an analytic expression applies, else nullopt.
  std::optional<double> closed_form_ball_mass(PointView center, double r) const;
  /// Radius g with mu(B(center, g)) = mass when analytic, else nullopt.
  std::optional<double> closed_form_inverse(PointView center, double mass) const;

  /// The same density multiplied by `factor` (used to normalize mu(W) = 1).
  DensityModel scaled(double factor) const;

  bool is_step() const { return std::holds_alternative<Step>(kind_); }
  /// Constant or linear (before clipping) in y.
  bool is_affine() const {
    return std::holds_alternative<Constant>(kind_) || std::holds_alternative<Linear>(kind_);
  }

 private:
  struct Constant {
    double c;
  };
  struct Linear {
    double a;
    double b;
  };
  struct Step {
    std::vector<int> cells;
    std::vector<double> values;
  };
  struct Custom {
    Function f;
  };

  DensityModel() = default;

  double step_value(PointView y) const;
  std::optional<double> step_mass_1d(double lo, double hi) const;

  int dim_ = 0;
  Box support_;
  double f_min_ = 0.0;
  double f_max_ = 0.0;
  std::optional<double> lipschitz_;
  std::string name_;
  double scale_ = 1.0;
  std::variant<Constant, Linear, Step, Custom> kind_;
};

/// Convex polygon in R^2, vertices in counter-clockwise order.
struct ConvexPolygon {
  std::vector<std::array<double, 2>> vertices;

  bool contains(PointView p) const;
  double area() const;
  Box bounding_box() const;
};

/// Observation window W: a compact box or a convex polygon inside A.
class Window {
 public:
  Window(Box box);
  Window(ConvexPolygon polygon);

  int dim() const;
  bool contains(PointView p) const;
  Box bounding_box() const;
  bool convex() const { return true; }
  bool is_box() const { return std::holds_alternative<Box>(region_); }
  const Box& box() const { return std::get<Box>(region_); }
  const ConvexPolygon& polygon() const { return std::get<ConvexPolygon>(region_); }
  std::string describe() const;

 private:
  std::variant<Box, ConvexPolygon> region_;
};

/// mu(B(center, radius)); closed form when available, else adaptive quadrature
/// with relative error <= 1e-8.
double ball_measure(const DensityModel& density, PointView center, double radius);

/// The radius g(x, u) with mu(B(x, g)) = u, to absolute tolerance 1e-12.
double invert_ball_measure(const DensityModel& density, PointView center, double mass);

struct ThresholdRadii {
  double v;  ///< t mu(B(x, 2v)) = u + log t
  double q;  ///< 2^d t mu(B(x, q)) = u + log t
};

ThresholdRadii threshold_radii(const DensityModel& density, PointView center, double u, double t);

/// Upper bound ((u + log t) / (2^d f_min k_d t))^{1/d} shared by v and q.
double threshold_radius_bound(const DensityModel& density, double u, double t);

struct DensityBounds {
  double beta;         ///< grid-refined minimum over the region
  double sup;          ///< grid-refined maximum over the region
  double beta_lower;   ///< guaranteed lower bound: Lipschitz slack if declared, else f_min
  double sup_upper;    ///< guaranteed upper bound: Lipschitz slack if declared, else f_max
};

DensityBounds density_bounds(const DensityModel& density, const Window& region);

/// mu(W).
double region_mass(const DensityModel& density, const Window& region);

}  // namespace ppconv
