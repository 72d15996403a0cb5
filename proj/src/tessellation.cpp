#include "ppconv/tessellation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ppconv/parallel.hpp"
#include "ppconv/rng.hpp"
#include "ppconv/spatial_grid.hpp"

namespace ppconv {
namespace {

constexpr int kMaxResimulations = 6;

// Distance from x to the faces of `simulated` that are not also faces of the
// support; beyond the support there are no points to miss.
double open_distance(PointView x, const Box& simulated, const Box& support) {
  double d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < simulated.dim(); ++i) {
    if (simulated.lo[i] > support.lo[i]) d = std::min(d, x[i] - simulated.lo[i]);
    if (simulated.hi[i] < support.hi[i]) d = std::min(d, simulated.hi[i] - x[i]);
  }
  return std::max(d, 0.0);
}

Box simulation_box(const Window& window, const Box& support, double margin) {
  Box box = window.bounding_box().dilated(margin);
  for (int i = 0; i < box.dim(); ++i) {
    box.lo[i] = std::max(box.lo[i], support.lo[i]);
    box.hi[i] = std::min(box.hi[i], support.hi[i]);
  }
  if (!support.contains(window.bounding_box())) {
    throw Error(Errc::support_exceeded, "window " + window.describe() + " is not inside the density support");
  }
  return box;
}

void check_inputs(const DensityModel& density, const Window& window, double t) {
  if (density.dim() != window.dim()) throw Error(Errc::domain, "density and window dimensions differ");
  if (!(t > 0.0) || !std::isfinite(t)) throw Error(Errc::domain, "t must be positive and finite");
}

RescaledSample::Meta make_meta(const char* transform, const DensityModel& density, const Window& window,
                               double t, std::uint64_t seed, std::uint64_t stream) {
  RescaledSample::Meta meta;
  meta.scale = t;
  meta.transform = transform;
  meta.descriptor = density.describe() + " on " + window.describe();
  meta.seed = seed;
  meta.stream = stream;
  return meta;
}

}  // namespace

double inradius_margin(const DensityModel& density, double t, double window_mass) {
  if (!(density.f_min() > 0.0)) {
    throw Error(Errc::nonpositive_minimum, "automatic margin needs a density bounded away from zero");
  }
  const int d = density.dim();
  const double nuclei = std::max(1.0, t * window_mass);
  return std::pow((25.0 + std::log(nuclei)) / (t * density.f_min() * unit_ball_volume(d)), 1.0 / d);
}

RescaledSample inradius_atoms(const PointConfig& config, const DensityModel& density, const Window& window,
                              double t, InradiusVariant variant, const Box& simulated) {
  check_inputs(density, window, t);
  const int d = config.dim();
  const double log_t = std::log(t);
  std::vector<double> atoms;
  if (config.size() >= 2) {
    const SpatialGrid grid(config);
    for (std::size_t p = 0; p < config.size(); ++p) {
      const auto x = config[p];
      if (!window.contains(x)) continue;
      const double c = inradius(x, grid, p);
      if (2.0 * c > open_distance(x, simulated, density.support())) {
        std::ostringstream msg;
        msg << "nearest neighbor distance " << 2.0 * c << " exceeds the simulation margin";
        throw Error(Errc::margin_too_small, msg.str());
      }
      double mass = 0.0;
      if (variant == InradiusVariant::two_c) {
        mass = ball_measure(density, x, 2.0 * c);
      } else {
        mass = std::ldexp(ball_measure(density, x, c), d);
      }
      atoms.push_back(t * mass - log_t);
    }
  } else if (config.size() == 1 && window.contains(config[0])) {
    throw Error(Errc::margin_too_small, "a single nucleus has no nearest neighbor inside the simulated box");
  }
  return {std::move(atoms), {}};
}

RescaledSample inradius_process(const DensityModel& density, const Window& window, double t, std::uint64_t seed,
                                InradiusVariant variant, std::uint64_t stream, double margin) {
  check_inputs(density, window, t);
  if (margin <= 0.0) margin = inradius_margin(density, t, region_mass(density, window));
  for (int attempt = 0;; ++attempt) {
    const Box box = simulation_box(window, density.support(), margin);
    const auto config = sample_poisson(density, t, box, seed, stream);
    try {
      auto sample = inradius_atoms(config, density, window, t, variant, box);
      sample.meta = make_meta(variant == InradiusVariant::two_c ? "inradius" : "inradius_hat", density, window, t,
                              seed, stream);
      sample.resimulations = static_cast<std::size_t>(attempt);
      return sample;
    } catch (const Error& e) {
      if (e.code() != Errc::margin_too_small || attempt >= kMaxResimulations) throw;
      margin *= 2.0;
    }
  }
}

double circumradius_scale(int d, double t, double alpha2_value) {
  return alpha2_value * std::pow(t, static_cast<double>(d + 2) / static_cast<double>(d + 1));
}

double circumradius_margin(const DensityModel& density, double t, double alpha2_value, double cap) {
  if (!(density.f_min() > 0.0)) {
    throw Error(Errc::nonpositive_minimum, "capped circumradius atoms need a density bounded away from zero");
  }
  const int d = density.dim();
  const double s_t = circumradius_scale(d, t, alpha2_value);
  const double r_ub = std::pow(cap / (s_t * density.f_min() * unit_ball_volume(d)), 1.0 / d);
  return 2.0 * r_ub * (1.0 + 1e-9) + 1e-300;
}

RescaledSample circumradius_atoms(const PointConfig& config, const DensityModel& density, const Window& window,
                                  double t, double alpha2_value, const Box& simulated, double cap) {
  check_inputs(density, window, t);
  const int d = config.dim();
  if (d > 2) throw Error(Errc::unsupported_dimension, "circumradius process is implemented for d in {1, 2}");
  if (!(alpha2_value > 0.0)) throw Error(Errc::domain, "alpha2 must be positive");
  const double s_t = circumradius_scale(d, t, alpha2_value);
  const bool capped = std::isfinite(cap);
  double r_ub = 0.0;
  if (capped) r_ub = 0.5 * circumradius_margin(density, t, alpha2_value, cap) / (1.0 + 1e-9);

  RescaledSample out;
  out.materialized_below = cap;
  if (config.empty()) return out;
  const SpatialGrid grid(config);
  const Box& support = density.support();
  // when nothing was cut off, doubling can stop once every point is a neighbor
  std::vector<double> lo(config[0].begin(), config[0].end());
  std::vector<double> hi = lo;
  for (std::size_t p = 1; p < config.size(); ++p) {
    for (int i = 0; i < d; ++i) {
      lo[i] = std::min(lo[i], config[p][i]);
      hi[i] = std::max(hi[i], config[p][i]);
    }
  }

  for (std::size_t p = 0; p < config.size(); ++p) {
    const auto x = config[p];
    if (!window.contains(x)) continue;
    const double open = open_distance(x, simulated, support);
    double C = kUnbounded;
    if (capped) {
      if (2.0 * r_ub > open) throw Error(Errc::margin_too_small, "capped circumradius margin violated");
      const auto nb = Neighborhood::from_grid(x, grid, 2.0 * r_ub, p);
      if (nb.size() == 0 || !cell_contained_in_ball(nb, r_ub)) {
        ++out.above_cap;
        continue;
      }
      C = circumradius(nb, 0.5 * nb.distance(0));
    } else {
      const auto nn = grid.nearest(x, p);
      if (!nn) {
        ++out.dropped_unbounded;
        continue;
      }
      double far = 0.0;
      for (int i = 0; i < d; ++i) far += std::pow(std::max(x[i] - lo[i], hi[i] - x[i]), 2);
      far = std::sqrt(far);
      bool done = false;
      for (double R = std::max(nn->distance, 1e-300); 2.0 * R <= open && R <= far; R *= 2.0) {
        const auto nb = Neighborhood::from_grid(x, grid, 2.0 * R, p);
        if (cell_contained_in_ball(nb, R)) {
          C = circumradius(nb, 0.5 * nb.distance(0));
          done = true;
          break;
        }
      }
      if (!done) {
        const auto all = Neighborhood::from_grid(x, grid, std::numeric_limits<double>::infinity(), p);
        if (!cell_boundedness(all).bounded) {
          ++out.dropped_unbounded;
          continue;
        }
        if (std::isfinite(open)) {
          throw Error(Errc::margin_too_small, "circumradius needs neighbors beyond the simulated box");
        }
        C = circumradius(all, 0.5 * all.distance(0));
      }
    }
    if (!std::isfinite(C)) {
      if (capped) {
        ++out.above_cap;
      } else {
        ++out.dropped_unbounded;
      }
      continue;
    }
    const double atom = s_t * ball_measure(density, x, C);
    if (atom > cap) {
      ++out.above_cap;
      continue;
    }
    out.atoms.push_back(atom);
  }
  std::sort(out.atoms.begin(), out.atoms.end());
  return out;
}

RescaledSample circumradius_process(const DensityModel& density, const Window& window, double t,
                                    std::uint64_t seed, double alpha2_value, std::uint64_t stream, double cap,
                                    double margin) {
  check_inputs(density, window, t);
  if (margin <= 0.0) {
    margin = std::isfinite(cap) ? circumradius_margin(density, t, alpha2_value, cap)
                                : 3.0 * inradius_margin(density, t, region_mass(density, window));
  }
  for (int attempt = 0;; ++attempt) {
    const Box box = simulation_box(window, density.support(), margin);
    const auto config = sample_poisson(density, t, box, seed, stream);
    try {
      auto sample = circumradius_atoms(config, density, window, t, alpha2_value, box, cap);
      sample.meta = make_meta("circumradius", density, window, t, seed, stream);
      sample.resimulations = static_cast<std::size_t>(attempt);
      return sample;
    } catch (const Error& e) {
      if (e.code() != Errc::margin_too_small || attempt >= kMaxResimulations) throw;
      margin *= 2.0;
    }
  }
}

Extremes extreme_statistics(const RescaledSample& sample) {
  if (sample.atoms.empty()) {
    return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  }
  const auto [lo, hi] = std::minmax_element(sample.atoms.begin(), sample.atoms.end());
  return {*hi, *lo};
}

Estimate intensity_estimate(const DensityModel& density, const Window& window, double t, const IntervalRing& ring,
                            std::size_t reps, std::uint64_t seed, ProcessKind kind, double alpha2_value,
                            int workers) {
  if (reps == 0) throw Error(Errc::insufficient_replicates, "intensity estimate needs reps >= 1");
  if (ring.empty()) return {0.0, 0.0};
  const auto counts = parallel_map(reps, workers, [&](std::size_t r) {
    const auto stream = stream_id(r, 0x17);
    RescaledSample sample;
    switch (kind) {
      case ProcessKind::inradius:
        sample = inradius_process(density, window, t, seed, InradiusVariant::two_c, stream);
        break;
      case ProcessKind::inradius_hat:
        sample = inradius_process(density, window, t, seed, InradiusVariant::two_pow_d_c, stream);
        break;
      case ProcessKind::circumradius:
        sample = circumradius_process(density, window, t, seed, alpha2_value, stream, ring.upper());
        break;
    }
    return static_cast<double>(ring.count(sample));
  });
  double sum = 0.0;
  double sum2 = 0.0;
  for (double c : counts) {
    sum += c;
    sum2 += c * c;
  }
  const auto R = static_cast<double>(reps);
  const double mean = sum / R;
  const double var = reps > 1 ? std::max(0.0, (sum2 - R * mean * mean) / (R - 1.0)) : 0.0;
  return {mean, std::sqrt(var / R)};
}

}  // namespace ppconv
