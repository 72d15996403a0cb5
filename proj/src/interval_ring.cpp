#include "ppconv/interval_ring.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ppconv/common.hpp"

namespace ppconv {

IntervalRing::IntervalRing(std::vector<Interval> intervals) {
  for (const auto& [a, b] : intervals) {
    if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
      throw Error(Errc::domain, "ring intervals must be bounded with a < b");
    }
  }
  std::sort(intervals.begin(), intervals.end());
  for (const auto& iv : intervals) {
    if (!intervals_.empty() && iv.first < intervals_.back().second) {
      intervals_.back().second = std::max(intervals_.back().second, iv.second);
    } else {
      intervals_.push_back(iv);
    }
  }
}

double IntervalRing::lower() const {
  if (intervals_.empty()) throw Error(Errc::domain, "empty ring has no lower end");
  return intervals_.front().first;
}

double IntervalRing::upper() const {
  if (intervals_.empty()) throw Error(Errc::domain, "empty ring has no upper end");
  return intervals_.back().second;
}

IntervalRing IntervalRing::unite(const IntervalRing& other) const {
  auto all = intervals_;
  all.insert(all.end(), other.intervals_.begin(), other.intervals_.end());
  return IntervalRing(std::move(all));
}

std::size_t IntervalRing::count(const RescaledSample& sample) const {
  std::size_t n = 0;
  for (const auto& [a, b] : intervals_) n += sample.count_open(a, b);
  return n;
}

std::string IntervalRing::describe() const {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    if (i) os << " u ";
    os << "(" << intervals_[i].first << "," << intervals_[i].second << ")";
  }
  return intervals_.empty() ? "{}" : os.str();
}

}  // namespace ppconv
