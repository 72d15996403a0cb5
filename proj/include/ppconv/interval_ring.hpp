#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ppconv/sample.hpp"

namespace ppconv {

/// Finite union of bounded open intervals, kept sorted and disjoint.
/// Overlapping inputs are merged; touching ones ((a,b) and (b,c)) stay apart
/// since their union excludes b.
class IntervalRing {
 public:
  using Interval = std::pair<double, double>;

  IntervalRing() = default;
  explicit IntervalRing(std::vector<Interval> intervals);
  static IntervalRing single(double a, double b) { return IntervalRing({{a, b}}); }

  const std::vector<Interval>& intervals() const { return intervals_; }
  bool empty() const { return intervals_.empty(); }
  double lower() const;
  double upper() const;
  IntervalRing unite(const IntervalRing& other) const;

  /// xi(B) for this set B.
  std::size_t count(const RescaledSample& sample) const;
  std::string describe() const;

  bool operator==(const IntervalRing& other) const = default;

 private:
  std::vector<Interval> intervals_;
};

}  // namespace ppconv
