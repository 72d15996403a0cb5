#include "ppconv/common.hpp"

#include <algorithm>
#include <limits>

namespace ppconv {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::ball_escapes_support: return "ball-escapes-support";
    case Errc::non_finite_density: return "non-finite-density";
    case Errc::mass_exceeds_reach: return "mass-exceeds-reach";
    case Errc::below_t0: return "below-t0";
    case Errc::nonpositive_minimum: return "nonpositive-minimum";
    case Errc::infinite_intensity: return "infinite-intensity";
    case Errc::ordering_violation: return "ordering-violation";
    case Errc::empty_neighborhood: return "empty-neighborhood";
    case Errc::unsupported_dimension: return "unsupported-dimension";
    case Errc::domain: return "domain";
    case Errc::insufficient_replicates: return "insufficient-replicates";
    case Errc::support_exceeded: return "support-exceeded";
    case Errc::empty_sample: return "empty-sample";
    case Errc::margin_too_small: return "margin-too-small";
    case Errc::config: return "config";
    case Errc::io: return "io";
  }
  return "unknown";
}

Box::Box(std::vector<double> lo_, std::vector<double> hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
  if (lo.size() != hi.size() || lo.empty()) {
    throw Error(Errc::domain, "box corners must have equal, nonzero dimension");
  }
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!(lo[i] < hi[i]) || !std::isfinite(lo[i]) || !std::isfinite(hi[i])) {
      throw Error(Errc::domain, "box requires finite lo < hi on every axis");
    }
  }
}

Box Box::cube(int dim, double lo, double hi) {
  return Box(std::vector<double>(static_cast<std::size_t>(dim), lo),
             std::vector<double>(static_cast<std::size_t>(dim), hi));
}

double Box::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
  return v;
}

bool Box::contains(PointView p) const {
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (p[i] < lo[i] || p[i] > hi[i]) return false;
  }
  return true;
}

bool Box::contains(const Box& other) const {
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (other.lo[i] < lo[i] || other.hi[i] > hi[i]) return false;
  }
  return true;
}

double Box::distance_to_boundary(PointView p) const {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lo.size(); ++i) {
    d = std::min({d, p[i] - lo[i], hi[i] - p[i]});
  }
  return std::max(d, 0.0);
}

Box Box::dilated(double margin) const {
  Box out = *this;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    out.lo[i] -= margin;
    out.hi[i] += margin;
  }
  return out;
}

double Box::margin_around(const Box& inner) const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lo.size(); ++i) {
    m = std::min({m, inner.lo[i] - lo[i], hi[i] - inner.hi[i]});
  }
  return m;
}

}  // namespace ppconv
