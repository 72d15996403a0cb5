#include "ppconv/runs.hpp"

#include <algorithm>
#include <cmath>

#include "ppconv/rng.hpp"

namespace ppconv {
namespace {

// Sorted 1-based positions j in [1, length] with E_j = 1, E_j ~ Bernoulli(q),
// by geometric skipping.
std::vector<std::size_t> bernoulli_positions(double q, std::size_t length, Philox4x32& rng) {
  std::vector<std::size_t> out;
  if (length == 0 || q <= 0.0) return out;
  if (q >= 1.0) {
    out.resize(length);
    for (std::size_t j = 0; j < length; ++j) out[j] = j + 1;
    return out;
  }
  out.reserve(static_cast<std::size_t>(q * static_cast<double>(length) * 1.1) + 16);
  const double log_miss = std::log1p(-q);
  double pos = 0.0;
  const auto limit = static_cast<double>(length);
  while (true) {
    // failures before the next success
    const double gap = std::floor(std::log(rng.uniform_open()) / log_miss);
    pos += gap + 1.0;
    if (pos > limit) break;
    out.push_back(static_cast<std::size_t>(pos));
  }
  return out;
}

// Given sorted positions of ones, emit the starts s of every window s..s+w-1
// of ones with s + w - 1 <= length.
std::vector<std::size_t> window_starts(const std::vector<std::size_t>& ones, std::size_t w, std::size_t length) {
  std::vector<std::size_t> out;
  if (w == 0 || length < w) return out;
  std::size_t a = 0;
  while (a < ones.size()) {
    std::size_t b = a;
    while (b + 1 < ones.size() && ones[b + 1] == ones[b] + 1) ++b;
    const std::size_t start = ones[a];
    const std::size_t run = b - a + 1;
    if (run >= w) {
      const std::size_t last = std::min(start + run - w, length - w + 1);
      for (std::size_t s = start; s <= last; ++s) out.push_back(s);
    }
    a = b + 1;
  }
  return out;
}

}  // namespace

double ProbabilitySchedule::at(std::uint64_t n) const {
  if (!(scale >= 0.0) || !std::isfinite(exponent)) throw Error(Errc::domain, "probability schedule needs scale >= 0");
  const double p = scale * std::pow(static_cast<double>(n), -exponent);
  return std::clamp(p, 0.0, 1.0);
}

BernoulliModel BernoulliModel::iid(ProbabilitySchedule p, int k) {
  if (k < 1) throw Error(Errc::domain, "run length k must be >= 1");
  return {Kind::iid, p, 0, k};
}

BernoulliModel BernoulliModel::block(ProbabilitySchedule a, int m, int k) {
  if (k < 1) throw Error(Errc::domain, "run length k must be >= 1");
  if (m < 0) throw Error(Errc::domain, "block window m must be >= 0");
  return {Kind::block_m_dependent, a, m, k};
}

double BernoulliModel::y(std::uint64_t n) const { return std::pow(q.at(n), m + k); }

std::size_t BernoulliModel::horizon(std::uint64_t n, double u_max) const {
  const double yn = y(n);
  if (!(yn > 0.0)) throw Error(Errc::domain, "y_n = 0: the run process has no atoms");
  const double bits = std::ceil(u_max / yn) + dependence_range() + k;
  if (!(bits < 4e18)) throw Error(Errc::domain, "horizon too large");
  return static_cast<std::size_t>(bits);
}

BitSequence::BitSequence(std::size_t length, std::vector<std::size_t> ones) : length_(length), ones_(std::move(ones)) {
  if (!std::is_sorted(ones_.begin(), ones_.end())) std::sort(ones_.begin(), ones_.end());
  if (!ones_.empty() && (ones_.front() < 1 || ones_.back() > length_)) {
    throw Error(Errc::domain, "bit positions must lie in [1, length]");
  }
}

BitSequence BitSequence::from_dense(const std::vector<int>& bits) {
  std::vector<std::size_t> ones;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != 0) ones.push_back(i + 1);
  }
  return {bits.size(), std::move(ones)};
}

std::vector<int> BitSequence::to_dense() const {
  std::vector<int> bits(length_, 0);
  for (std::size_t i : ones_) bits[i - 1] = 1;
  return bits;
}

bool BitSequence::operator[](std::size_t i) const { return std::binary_search(ones_.begin(), ones_.end(), i); }

BitSequence simulate_bernoulli_array(const BernoulliModel& model, std::uint64_t n, std::size_t horizon,
                                     std::uint64_t seed, std::uint64_t stream) {
  if (horizon < static_cast<std::size_t>(model.k)) throw Error(Errc::domain, "horizon must be >= k");
  Philox4x32 rng(seed, stream);
  const auto m = static_cast<std::size_t>(model.m);
  const auto events = bernoulli_positions(model.q.at(n), horizon + m, rng);
  if (m == 0) return {horizon, events};
  // X_i = E_i ... E_{i+m}
  return {horizon, window_starts(events, m + 1, horizon + m)};
}

BitSequence run_indicators(const BitSequence& bits, int k) {
  if (k < 1) throw Error(Errc::domain, "run length k must be >= 1");
  const auto w = static_cast<std::size_t>(k);
  if (bits.length() < w) return {};
  return {bits.length() - w + 1, window_starts(bits.ones(), w, bits.length())};
}

RescaledSample build_run_process(const BitSequence& indicators, double y_n) {
  if (!(y_n > 0.0)) throw Error(Errc::domain, "y_n must be > 0");
  std::vector<double> atoms;
  atoms.reserve(indicators.count());
  for (std::size_t i : indicators.ones()) atoms.push_back(static_cast<double>(i) * y_n);
  RescaledSample::Meta meta;
  meta.transform = "runs";
  RescaledSample out(std::move(atoms), std::move(meta));
  // every i with i * y_n below this level was simulated
  out.materialized_below = static_cast<double>(indicators.length() + 1) * y_n;
  return out;
}

RescaledSample build_run_process(const BitSequence& bits, int k, double y_n) {
  return build_run_process(run_indicators(bits, k), y_n);
}

std::optional<double> first_arrival(const BitSequence& bits, int k, double y_n) {
  if (!(y_n > 0.0)) throw Error(Errc::domain, "y_n must be > 0");
  const auto ind = run_indicators(bits, k);
  if (ind.count() == 0) return std::nullopt;
  return static_cast<double>(ind.ones().front()) * y_n;
}

NeighborhoodCondition estimate_neighborhood_condition(const BernoulliModel& model, std::uint64_t n,
                                                      std::size_t reps, std::uint64_t seed) {
  if (reps == 0) throw Error(Errc::insufficient_replicates, "neighborhood condition needs reps >= 1");
  const double q = model.q.at(n);
  const long f = model.dependence_range();
  const long k = model.k;
  const long m = model.m;
  const long range = f + k - 2;
  // I_j = E_j ... E_{j+m+k-1}
  const long span = m + k;

  NeighborhoodCondition out;
  out.indices = {1, static_cast<std::size_t>(f + k), static_cast<std::size_t>(2 * (f + k))};
  out.condition = {-1.0, 0.0};
  out.pairwise_sum = {-1.0, 0.0};

  for (std::size_t which = 0; which < out.indices.size(); ++which) {
    const long i = static_cast<long>(out.indices[which]);
    const long lo = std::max(1L, i - range);
    const long hi = i + range;
    const long e_lo = lo;
    const long e_hi = hi + span - 1;
    Philox4x32 rng(seed, stream_id(which, 0x4e));
    std::vector<char> e(static_cast<std::size_t>(e_hi - e_lo + 1));
    double hits = 0.0;
    double sum_w = 0.0;
    double sum_w2 = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      for (long j = e_lo; j <= e_hi; ++j) {
        const bool forced = j >= i && j < i + span;
        e[static_cast<std::size_t>(j - e_lo)] = forced || rng.uniform() < q;
      }
      long w = 0;
      for (long j = lo; j <= hi; ++j) {
        if (j == i) continue;
        bool all = true;
        for (long l = j; l < j + span && all; ++l) all = e[static_cast<std::size_t>(l - e_lo)] != 0;
        w += all ? 1 : 0;
      }
      hits += w > 0 ? 1.0 : 0.0;
      sum_w += static_cast<double>(w);
      sum_w2 += static_cast<double>(w) * static_cast<double>(w);
    }
    const auto R = static_cast<double>(reps);
    const double p = hits / R;
    const double mean = sum_w / R;
    const double var = std::max(0.0, sum_w2 / R - mean * mean);
    out.per_index.push_back(p);
    if (p > out.condition.value) out.condition = {p, std::sqrt(p * (1.0 - p) / R)};
    if (mean > out.pairwise_sum.value) out.pairwise_sum = {mean, std::sqrt(var / R)};
  }
  return out;
}

}  // namespace ppconv
