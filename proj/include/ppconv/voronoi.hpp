#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "ppconv/point_process.hpp"
#include "ppconv/spatial_grid.hpp"

namespace ppconv {

/// Circumradius value of a cell that is not contained in any ball.
inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

/// Neighbors of a nucleus x given as offsets x_j - x, sorted by distance.
class Neighborhood {
 public:
  explicit Neighborhood(int dim) : dim_(dim) {}

  /// All points of `config` other than x itself.
  static Neighborhood from_config(PointView x, const PointConfig& config);
  /// Points of the grid within `radius` of x, except the point `self`.
  static Neighborhood from_grid(PointView x, const SpatialGrid& grid, double radius,
                                std::size_t self = SpatialGrid::npos);

  void add(PointView offset);
  /// Sorts by distance; called by the factories, needed after manual add().
  void finalize();

  int dim() const { return dim_; }
  std::size_t size() const { return dist_.size(); }
  PointView offset(std::size_t i) const {
    return {offsets_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  double distance(std::size_t i) const { return dist_[i]; }
  /// Number of neighbors with distance <= r.
  std::size_t count_within(double r) const;

 private:
  int dim_;
  std::vector<double> offsets_;
  std::vector<double> dist_;
};

/// Direction caps A_j(R) = {u : <u, (x_j - x)/|x_j - x|> >= |x_j - x| / (2R)}
/// over neighbors within 2R. d = 1 caps are the half-lines left/right; d = 2
/// caps are closed arcs (center angle, half width).
struct CapSet {
  struct Arc {
    double center;
    double half_width;
  };
  int dim = 2;
  bool left = false;
  bool right = false;
  std::vector<Arc> arcs;
};

CapSet build_caps(const Neighborhood& neighbors, double R);
/// True when the caps cover S^{d-1} (touching closed arcs count as covered).
bool covers_sphere(const CapSet& caps);

/// c(x, config) = half the distance to the nearest point other than x.
double inradius(PointView x, const PointConfig& config);
double inradius(PointView x, const SpatialGrid& grid, std::size_t self = SpatialGrid::npos);

/// N(x, config) ⊆ B(x, R), via the cap-coverage criterion. d in {1, 2}.
bool cell_contained_in_ball(PointView x, const PointConfig& config, double R);
bool cell_contained_in_ball(const Neighborhood& neighbors, double R);

/// C(x, config) to absolute tolerance 1e-10, or kUnbounded.
double circumradius(PointView x, const PointConfig& config);
double circumradius(const Neighborhood& neighbors, double lower_bound);

struct Boundedness {
  bool bounded;
  bool degenerate;  ///< x within 1e-12 of the hull boundary
};

/// x in the interior of conv(neighbors) (equivalently the open half-sphere
/// caps cover S^{d-1}). d in {1, 2}.
Boundedness cell_boundedness(PointView x, const PointConfig& neighbors);
Boundedness cell_boundedness(const Neighborhood& neighbors);
bool is_cell_bounded(PointView x, const PointConfig& neighbors);

struct Estimate {
  double value;
  double std_error;
};

/// Monte Carlo p_k: probability that the cell of 0 among k i.i.d. uniform
/// points in B(0, 2) lies inside B(0, 1).
Estimate estimate_p_k(int d, int k, std::size_t n_samples, std::uint64_t seed);

/// (2^{d(d+1)} / (d+1)! * p)^{1/(d+1)}.
double alpha2(int d, double p);

}  // namespace ppconv
