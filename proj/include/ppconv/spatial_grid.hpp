#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "ppconv/point_process.hpp"

namespace ppconv {

/// Uniform-grid spatial hash over a point configuration (d <= 3), stored as
/// a compressed cell -> points table. Built once, then shared read-only.
class SpatialGrid {
 public:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  /// `cell_size` <= 0 picks a size giving about two points per cell.
  explicit SpatialGrid(const PointConfig& config, double cell_size = 0.0);

  struct Neighbor {
    std::size_t index;
    double distance;
  };

  /// Nearest point to x other than `exclude`, searching no farther than
  /// `max_radius`.
  std::optional<Neighbor> nearest(PointView x, std::size_t exclude = npos,
                                  double max_radius = std::numeric_limits<double>::infinity()) const;

  /// Appends to `out` the indices of points within `radius` of x (closed
  /// ball), except `exclude`.
  void within(PointView x, double radius, std::vector<std::size_t>& out, std::size_t exclude = npos) const;

  double cell_size() const { return cell_; }
  const PointConfig& config() const { return *config_; }

 private:
  long cell_coord(double v, int axis) const;
  std::size_t flat(const long* c) const;

  const PointConfig* config_;
  int dim_;
  double cell_ = 1.0;
  std::vector<double> origin_;
  std::vector<long> counts_;
  std::vector<std::size_t> start_;
  std::vector<std::size_t> order_;
};

}  // namespace ppconv
