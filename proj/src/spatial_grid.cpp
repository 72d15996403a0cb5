#include "ppconv/spatial_grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace ppconv {

SpatialGrid::SpatialGrid(const PointConfig& config, double cell_size)
    : config_(&config), dim_(config.dim()) {
  if (dim_ > 3) throw Error(Errc::unsupported_dimension, "spatial grid supports d <= 3");
  const std::size_t n = config.size();
  std::vector<double> lo(static_cast<std::size_t>(dim_), 0.0);
  std::vector<double> hi(static_cast<std::size_t>(dim_), 1.0);
  if (n > 0) {
    for (int i = 0; i < dim_; ++i) lo[i] = hi[i] = config[0][i];
    for (std::size_t p = 1; p < n; ++p) {
      for (int i = 0; i < dim_; ++i) {
        lo[i] = std::min(lo[i], config[p][i]);
        hi[i] = std::max(hi[i], config[p][i]);
      }
    }
  }
  double volume = 1.0;
  double longest = 0.0;
  for (int i = 0; i < dim_; ++i) {
    const double extent = std::max(hi[i] - lo[i], 1e-300);
    volume *= extent;
    longest = std::max(longest, extent);
  }
  if (cell_size > 0.0) {
    cell_ = cell_size;
  } else {
    const double per_cell = 2.0;
    cell_ = n > 1 ? std::pow(volume * per_cell / static_cast<double>(n), 1.0 / dim_) : longest;
    if (!(cell_ > 0.0) || !std::isfinite(cell_)) cell_ = std::max(longest, 1e-12);
  }
  // Cap the table at a few cells per point to bound memory for thin boxes.
  const double max_cells = 8.0 * static_cast<double>(std::max<std::size_t>(n, 1)) + 64.0;
  while (true) {
    double cells = 1.0;
    for (int i = 0; i < dim_; ++i) cells *= std::floor((hi[i] - lo[i]) / cell_) + 1.0;
    if (cells <= max_cells) break;
    cell_ *= 1.5;
  }

  origin_ = lo;
  counts_.resize(static_cast<std::size_t>(dim_));
  std::size_t total = 1;
  for (int i = 0; i < dim_; ++i) {
    counts_[i] = static_cast<long>(std::floor((hi[i] - lo[i]) / cell_)) + 1;
    total *= static_cast<std::size_t>(counts_[i]);
  }
  start_.assign(total + 1, 0);
  std::vector<std::size_t> cell_of(n);
  for (std::size_t p = 0; p < n; ++p) {
    std::array<long, 3> c{};
    for (int i = 0; i < dim_; ++i) c[i] = cell_coord(config[p][i], i);
    cell_of[p] = flat(c.data());
    ++start_[cell_of[p] + 1];
  }
  for (std::size_t c = 0; c < total; ++c) start_[c + 1] += start_[c];
  order_.resize(n);
  std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
  for (std::size_t p = 0; p < n; ++p) order_[fill[cell_of[p]]++] = p;
}

long SpatialGrid::cell_coord(double v, int axis) const {
  const double c = std::floor((v - origin_[axis]) / cell_);
  if (!(c > 0.0)) return 0;
  const auto top = static_cast<double>(counts_[axis] - 1);
  return c >= top ? counts_[axis] - 1 : static_cast<long>(c);
}

std::size_t SpatialGrid::flat(const long* c) const {
  std::size_t index = 0;
  std::size_t stride = 1;
  for (int i = 0; i < dim_; ++i) {
    index += static_cast<std::size_t>(c[i]) * stride;
    stride *= static_cast<std::size_t>(counts_[i]);
  }
  return index;
}

std::optional<SpatialGrid::Neighbor> SpatialGrid::nearest(PointView x, std::size_t exclude,
                                                           double max_radius) const {
  const auto& cfg = *config_;
  std::array<long, 3> home{};
  long max_count = 0;
  for (int i = 0; i < dim_; ++i) {
    home[i] = cell_coord(x[i], i);
    max_count = std::max(max_count, counts_[i]);
  }
  double best2 = max_radius * max_radius;
  std::size_t best = npos;
  for (long shell = 0; shell <= max_count; ++shell) {
    // Every cell in this shell is at least (shell - 1) * cell_ away from x
    // (x may sit outside its clamped home cell, which only increases that).
    const double reach = (shell - 1) * cell_;
    if (shell > 0 && reach > 0.0 && reach * reach > best2) break;
    std::array<long, 3> lo{}, hi{};
    for (int i = 0; i < dim_; ++i) {
      lo[i] = home[i] - shell;
      hi[i] = home[i] + shell;
    }
    std::array<long, 3> c = lo;
    while (true) {
      bool on_shell = false;
      bool inside = true;
      for (int i = 0; i < dim_; ++i) {
        if (c[i] == lo[i] || c[i] == hi[i]) on_shell = true;
        if (c[i] < 0 || c[i] >= counts_[i]) inside = false;
      }
      if ((on_shell || shell == 0) && inside) {
        const std::size_t cell = flat(c.data());
        for (std::size_t k = start_[cell]; k < start_[cell + 1]; ++k) {
          const std::size_t p = order_[k];
          if (p == exclude) continue;
          const double d2 = squared_distance(x, cfg[p]);
          if (d2 < best2 || (d2 == best2 && best == npos)) {
            best2 = d2;
            best = p;
          }
        }
      }
      int axis = 0;
      while (axis < dim_ && ++c[axis] > hi[axis]) {
        c[axis] = lo[axis];
        ++axis;
      }
      if (axis == dim_) break;
    }
  }
  if (best == npos) return std::nullopt;
  return Neighbor{best, std::sqrt(best2)};
}

void SpatialGrid::within(PointView x, double radius, std::vector<std::size_t>& out, std::size_t exclude) const {
  const auto& cfg = *config_;
  std::array<long, 3> lo{}, hi{};
  for (int i = 0; i < dim_; ++i) {
    lo[i] = cell_coord(x[i] - radius, i);
    hi[i] = cell_coord(x[i] + radius, i);
  }
  const double r2 = radius * radius;
  std::array<long, 3> c = lo;
  while (true) {
    const std::size_t cell = flat(c.data());
    for (std::size_t k = start_[cell]; k < start_[cell + 1]; ++k) {
      const std::size_t p = order_[k];
      if (p != exclude && squared_distance(x, cfg[p]) <= r2) out.push_back(p);
    }
    int axis = 0;
    while (axis < dim_ && ++c[axis] > hi[axis]) {
      c[axis] = lo[axis];
      ++axis;
    }
    if (axis == dim_) break;
  }
}

}  // namespace ppconv
