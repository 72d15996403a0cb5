#include "ppconv/point_process.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "json.hpp"

#include "ppconv/rng.hpp"

namespace ppconv {
namespace {

constexpr const char* kind_name(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::poisson: return "poisson";
    case GeneratorKind::binomial: return "binomial";
    case GeneratorKind::coupled_layer: return "coupled-layer";
  }
  return "unknown";
}

void check_sampling_box(const DensityModel& density, const Box& box) {
  if (box.dim() != density.dim()) throw Error(Errc::domain, "sampling box dimension mismatch");
  if (!density.support().contains(box)) {
    throw Error(Errc::support_exceeded, "sampling box must lie inside the density support");
  }
}

void uniform_point(Philox4x32& rng, const Box& box, std::vector<double>& out) {
  for (int i = 0; i < box.dim(); ++i) {
    out[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * rng.uniform();
  }
}

// Visits the vertices of a regular grid over `box`.
template <class Fn>
void for_each_grid_point(const Box& box, int per_axis, Fn&& fn) {
  const int d = box.dim();
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  std::vector<double> y(static_cast<std::size_t>(d));
  while (true) {
    for (int i = 0; i < d; ++i) {
      y[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * idx[i] / (per_axis - 1);
    }
    fn(PointView(y));
    int axis = 0;
    while (axis < d && ++idx[axis] == per_axis) idx[axis++] = 0;
    if (axis == d) break;
  }
}

}  // namespace

PointConfig::PointConfig(int dim, GeneratorMeta meta) : dim_(dim), meta_(std::move(meta)) {
  if (dim < 1) throw Error(Errc::domain, "dimension must be >= 1");
}

void PointConfig::push_back(PointView p) {
  if (static_cast<int>(p.size()) != dim_) throw Error(Errc::domain, "point dimension mismatch");
  coords_.insert(coords_.end(), p.begin(), p.end());
}

bool PointConfig::has_duplicates() const {
  std::vector<std::size_t> order(size());
  std::iota(order.begin(), order.end(), 0);
  auto less = [&](std::size_t a, std::size_t b) {
    const auto pa = (*this)[a];
    const auto pb = (*this)[b];
    return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end());
  };
  std::sort(order.begin(), order.end(), less);
  for (std::size_t i = 1; i < order.size(); ++i) {
    const auto pa = (*this)[order[i - 1]];
    const auto pb = (*this)[order[i]];
    if (std::equal(pa.begin(), pa.end(), pb.begin())) return true;
  }
  return false;
}

void PointConfig::write_csv(std::ostream& os) const {
  for (int i = 0; i < dim_; ++i) os << (i ? "," : "") << "x" << (i + 1);
  os << "\n";
  char buf[32];
  for (std::size_t p = 0; p < size(); ++p) {
    const auto pt = (*this)[p];
    for (int i = 0; i < dim_; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", pt[i]);
      os << (i ? "," : "") << buf;
    }
    os << "\n";
  }
}

std::string PointConfig::metadata_json() const {
  nlohmann::ordered_json j;
  j["kind"] = kind_name(meta_.kind);
  j[meta_.kind == GeneratorKind::binomial ? "n" : "t"] = meta_.scale;
  j["seed"] = meta_.seed;
  j["stream"] = meta_.stream;
  j["box"] = {{"lo", meta_.box.lo}, {"hi", meta_.box.hi}};
  if (!meta_.layer.empty()) j["layer"] = meta_.layer;
  j["dim"] = dim_;
  j["count"] = size();
  return j.dump(2);
}

PointConfig sample_poisson(const DensityModel& density, double t, const Box& box, std::uint64_t seed,
                           std::uint64_t stream) {
  check_sampling_box(density, box);
  if (!(t > 0.0)) throw Error(Errc::domain, "t must be positive");
  const double f_max = density.f_max();
  const double proposal_mean = t * f_max * box.volume();
  if (!std::isfinite(proposal_mean)) throw Error(Errc::infinite_intensity, "t * f_max * vol(box) is not finite");

  Philox4x32 rng(seed, stream);
  PointConfig out(density.dim(), {GeneratorKind::poisson, t, seed, stream, box, ""});
  if (proposal_mean == 0.0) return out;
  const long n = std::poisson_distribution<long>(proposal_mean)(rng);
  out.reserve(static_cast<std::size_t>(n));
  std::vector<double> y(static_cast<std::size_t>(density.dim()));
  for (long i = 0; i < n; ++i) {
    uniform_point(rng, box, y);
    const double keep = rng.uniform();
    if (keep * f_max < density(y)) out.push_back(y);
  }
  return out;
}

PointConfig sample_binomial(const DensityModel& distribution, std::size_t n, const Box& box,
                            std::uint64_t seed, std::uint64_t stream) {
  check_sampling_box(distribution, box);
  PointConfig out(distribution.dim(), {GeneratorKind::binomial, static_cast<double>(n), seed, stream, box, ""});
  if (n == 0) return out;
  const double total = region_mass(distribution, Window(box));
  if (!(distribution.f_max() > 0.0) || std::abs(total - 1.0) > 1e-6) {
    throw Error(Errc::domain, "binomial sampling needs a density normalized to one on the box");
  }
  Philox4x32 rng(seed, stream);
  out.reserve(n);
  std::vector<double> y(static_cast<std::size_t>(distribution.dim()));
  while (out.size() < n) {
    uniform_point(rng, box, y);
    if (rng.uniform() * distribution.f_max() < distribution(y)) out.push_back(y);
  }
  return out;
}

CoupledLayers sample_coupled_sandwich(const DensityModel& phi, const DensityModel& f1, const DensityModel& f2,
                                      double t, const Box& box, std::uint64_t seed, std::uint64_t stream) {
  check_sampling_box(phi, box);
  check_sampling_box(f1, box);
  check_sampling_box(f2, box);
  if (!(t > 0.0)) throw Error(Errc::domain, "t must be positive");
  const int per_axis = box.dim() == 1 ? 4097 : (box.dim() == 2 ? 129 : 33);
  for_each_grid_point(box, per_axis, [&](PointView y) {
    const double a = f1(y);
    const double b = phi(y);
    const double c = f2(y);
    if (a > b * (1.0 + 1e-12) || b > c * (1.0 + 1e-12)) {
      throw Error(Errc::ordering_violation, "coupled sampler needs f1 <= phi <= f2 on the box");
    }
  });

  const double envelope = f2.f_max();
  const double mean = t * envelope * box.volume();
  if (!std::isfinite(mean)) throw Error(Errc::infinite_intensity, "t * sup f2 * vol(box) is not finite");
  Philox4x32 rng(seed, stream);
  const int d = phi.dim();
  CoupledLayers out{PointConfig(d, {GeneratorKind::coupled_layer, t, seed, stream, box, "lower"}),
                    PointConfig(d, {GeneratorKind::coupled_layer, t, seed, stream, box, "mid"}),
                    PointConfig(d, {GeneratorKind::coupled_layer, t, seed, stream, box, "upper"})};
  if (mean == 0.0) return out;
  const long n = std::poisson_distribution<long>(mean)(rng);
  std::vector<double> y(static_cast<std::size_t>(d));
  for (long i = 0; i < n; ++i) {
    uniform_point(rng, box, y);
    // Mark on [0, t * envelope); compare against t * density.
    const double mark = rng.uniform() * envelope;
    if (mark < f2(y)) out.upper.push_back(y);
    if (mark < phi(y)) out.mid.push_back(y);
    if (mark < f1(y)) out.lower.push_back(y);
  }
  return out;
}

PointConfig restrict(const PointConfig& config, const Box& region) {
  PointConfig out(config.dim(), config.meta());
  for (std::size_t i = 0; i < config.size(); ++i) {
    if (region.contains(config[i])) out.push_back(config[i]);
  }
  return out;
}

PointConfig restrict(const PointConfig& config, const Window& region) {
  PointConfig out(config.dim(), config.meta());
  for (std::size_t i = 0; i < config.size(); ++i) {
    if (region.contains(config[i])) out.push_back(config[i]);
  }
  return out;
}

}  // namespace ppconv
