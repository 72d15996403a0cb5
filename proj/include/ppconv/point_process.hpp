#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ppconv/common.hpp"
#include "ppconv/density.hpp"

namespace ppconv {

enum class GeneratorKind { poisson, binomial, coupled_layer };

struct GeneratorMeta {
  GeneratorKind kind = GeneratorKind::poisson;
  double scale = 0.0;  ///< t for Poisson layers, n for binomial configurations
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  Box box;
  std::string layer;  ///< "lower" / "mid" / "upper" for coupled layers
};

/// Finite point configuration in R^d stored as a flat row-major array.
class PointConfig {
 public:
  PointConfig(int dim, GeneratorMeta meta);

  int dim() const { return dim_; }
  std::size_t size() const { return coords_.size() / static_cast<std::size_t>(dim_); }
  bool empty() const { return coords_.empty(); }
  PointView operator[](std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  const std::vector<double>& coords() const { return coords_; }
  const GeneratorMeta& meta() const { return meta_; }

  void push_back(PointView p);
  void reserve(std::size_t n) { coords_.reserve(n * static_cast<std::size_t>(dim_)); }

  /// True when two points coincide exactly (a sampler bug for continuous laws).
  bool has_duplicates() const;

  /// One point per row, header x1..xd.
  void write_csv(std::ostream& os) const;
  /// Generator metadata (kind, t or n, seed, stream, sampling box) as JSON.
  std::string metadata_json() const;

 private:
  int dim_;
  GeneratorMeta meta_;
  std::vector<double> coords_;
};

/// Poisson process with intensity t * mu on `box`, by thinning a homogeneous
/// proposal at rate t * f_max.
PointConfig sample_poisson(const DensityModel& density, double t, const Box& box, std::uint64_t seed,
                           std::uint64_t stream = 0);

/// n i.i.d. points with density `distribution` on `box` (which must integrate
/// to one there), by rejection from the uniform law on the box.
PointConfig sample_binomial(const DensityModel& distribution, std::size_t n, const Box& box,
                            std::uint64_t seed, std::uint64_t stream = 0);

struct CoupledLayers {
  PointConfig lower;  ///< intensity t * f1
  PointConfig mid;    ///< intensity t * phi
  PointConfig upper;  ///< intensity t * f2
};

/// Three thinnings of one marked uniform process on box x [0, t * sup f2]:
/// a mark y keeps x in a layer when y <= t * layer_density(x). Requires
/// f1 <= phi <= f2 on the box (checked on a grid).
CoupledLayers sample_coupled_sandwich(const DensityModel& phi, const DensityModel& f1, const DensityModel& f2,
                                      double t, const Box& box, std::uint64_t seed,
                                      std::uint64_t stream = 0);

PointConfig restrict(const PointConfig& config, const Box& region);
PointConfig restrict(const PointConfig& config, const Window& region);

}  // namespace ppconv
