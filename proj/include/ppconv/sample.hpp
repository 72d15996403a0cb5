#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace ppconv {

/// Atoms of a point process on R derived from one replicate, with their seeds.
struct RescaledSample {
  struct Meta {
    double scale = 0.0;      ///< t or n
    std::string transform;   ///< e.g. "runs", "inradius", "circumradius"
    std::string descriptor;  ///< model / window description
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
  };

  std::vector<double> atoms;  ///< sorted ascending
  Meta meta;
  /// Atoms above this level were not materialized (+inf: all atoms present).
  double materialized_below = std::numeric_limits<double>::infinity();
  std::size_t above_cap = 0;          ///< nuclei whose atom exceeds materialized_below
  std::size_t dropped_unbounded = 0;  ///< nuclei with unbounded cells (no atom)
  std::size_t resimulations = 0;      ///< margin-violation retries

  RescaledSample() = default;
  RescaledSample(std::vector<double> a, Meta m) : atoms(std::move(a)), meta(std::move(m)) {
    std::sort(atoms.begin(), atoms.end());
  }

  /// Number of atoms in the open interval (a, b).
  std::size_t count_open(double a, double b) const {
    if (!(a < b)) return 0;
    const auto lo = std::upper_bound(atoms.begin(), atoms.end(), a);
    const auto hi = std::lower_bound(atoms.begin(), atoms.end(), b);
    return hi > lo ? static_cast<std::size_t>(hi - lo) : 0;
  }
};

}  // namespace ppconv
