#pragma once

#include <cstdint>
#include <limits>

#include "ppconv/density.hpp"
#include "ppconv/interval_ring.hpp"
#include "ppconv/point_process.hpp"
#include "ppconv/sample.hpp"
#include "ppconv/voronoi.hpp"

namespace ppconv {

enum class InradiusVariant {
  two_c,        ///< t mu(B(x, 2c)) - log t
  two_pow_d_c,  ///< 2^d t mu(B(x, c)) - log t
};

enum class ProcessKind { inradius, inradius_hat, circumradius };

/// Transforms the nuclei of `config` lying in `window` into inradius atoms.
/// `simulated` is the box the configuration was sampled on; a nucleus whose
/// nearest neighbor is farther than the box boundary throws margin_too_small.
RescaledSample inradius_atoms(const PointConfig& config, const DensityModel& density, const Window& window,
                              double t, InradiusVariant variant, const Box& simulated);

/// Samples eta_t on W plus a margin and returns xi_t (or the hat variant).
/// Margin violations are retried with a doubled margin; the number of retries
/// is recorded in RescaledSample::resimulations.
RescaledSample inradius_process(const DensityModel& density, const Window& window, double t, std::uint64_t seed,
                                InradiusVariant variant, std::uint64_t stream = 0, double margin = 0.0);

/// s_t = alpha2 * t^{(d+2)/(d+1)}.
double circumradius_scale(int d, double t, double alpha2_value);

/// Circumradius atoms s_t mu(B(x, C(x))) for nuclei in `window`.
/// With a finite `cap`, only atoms below the cap are computed; larger ones are
/// counted in above_cap. This is exact for any statistic on [0, cap].
RescaledSample circumradius_atoms(const PointConfig& config, const DensityModel& density, const Window& window,
                                  double t, double alpha2_value, const Box& simulated,
                                  double cap = std::numeric_limits<double>::infinity());

/// Margin needed so every decision below `cap` only uses simulated points.
double circumradius_margin(const DensityModel& density, double t, double alpha2_value, double cap);

RescaledSample circumradius_process(const DensityModel& density, const Window& window, double t,
                                    std::uint64_t seed, double alpha2_value, std::uint64_t stream = 0,
                                    double cap = std::numeric_limits<double>::infinity(), double margin = 0.0);

struct Extremes {
  double max;  ///< -inf when empty
  double min;  ///< +inf when empty
};

/// For capped circumradius samples the max is only a lower bound when
/// above_cap > 0; the min is exact whenever it is finite.
Extremes extreme_statistics(const RescaledSample& sample);

/// Monte Carlo mean of xi_t(B) over replicates.
Estimate intensity_estimate(const DensityModel& density, const Window& window, double t, const IntervalRing& ring,
                            std::size_t reps, std::uint64_t seed, ProcessKind kind, double alpha2_value = 1.0,
                            int workers = 1);

/// Default simulation margin: nearest-neighbor distances exceed it with
/// probability below e^{-25} per nucleus.
double inradius_margin(const DensityModel& density, double t, double window_mass);

}  // namespace ppconv
