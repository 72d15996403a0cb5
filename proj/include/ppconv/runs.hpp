#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "ppconv/sample.hpp"
#include "ppconv/voronoi.hpp"

namespace ppconv {

/// p_n = min(1, scale * n^{-exponent}).
struct ProbabilitySchedule {
  double scale = 1.0;
  double exponent = 0.0;

  double at(std::uint64_t n) const;
};

/// Bernoulli arrays X_i^{(n)} built from i.i.d. base events E_j ~ Bernoulli(q_n)
/// with X_i = 1{E_i = ... = E_{i+m} = 1}. m = 0 is the i.i.d. model; m >= 1
/// gives an (m+1)-dependent stationary array.
struct BernoulliModel {
  enum class Kind { iid, block_m_dependent };

  Kind kind = Kind::iid;
  ProbabilitySchedule q;
  int m = 0;
  int k = 1;  ///< run length

  static BernoulliModel iid(ProbabilitySchedule p, int k);
  static BernoulliModel block(ProbabilitySchedule a, int m, int k);

  /// f(n): X_q is independent of {X_l : |q - l| >= f(n)}.
  int dependence_range() const { return m + 1; }
  /// y_n = P(X_q = ... = X_{q+k-1} = 1) = q_n^{m+k}.
  double y(std::uint64_t n) const;
  /// ceil(u_max / y_n) + f(n) + k bits, enough for every interval in (0, u_max).
  std::size_t horizon(std::uint64_t n, double u_max) const;
};

/// Bits X_1..X_length stored sparsely as the sorted 1-based positions of ones.
class BitSequence {
 public:
  BitSequence() = default;
  BitSequence(std::size_t length, std::vector<std::size_t> ones);

  static BitSequence from_dense(const std::vector<int>& bits);
  std::vector<int> to_dense() const;

  std::size_t length() const { return length_; }
  const std::vector<std::size_t>& ones() const { return ones_; }
  std::size_t count() const { return ones_.size(); }
  /// X_i, 1-based.
  bool operator[](std::size_t i) const;

 private:
  std::size_t length_ = 0;
  std::vector<std::size_t> ones_;
};

BitSequence simulate_bernoulli_array(const BernoulliModel& model, std::uint64_t n, std::size_t horizon,
                                     std::uint64_t seed, std::uint64_t stream = 0);

/// I_i = 1{X_i = ... = X_{i+k-1} = 1} for i = 1..length-k+1.
BitSequence run_indicators(const BitSequence& bits, int k);

/// Atoms {i * y_n : I_i = 1}.
RescaledSample build_run_process(const BitSequence& indicators, double y_n);
RescaledSample build_run_process(const BitSequence& bits, int k, double y_n);

/// y_n * T_n with T_n the first i where I_i = 1; nullopt when censored.
std::optional<double> first_arrival(const BitSequence& bits, int k, double y_n);

struct NeighborhoodCondition {
  Estimate condition;     ///< sup_i y_n^{-1} E[I_i 1{W_i > 0}]
  Estimate pairwise_sum;  ///< sup_i y_n^{-1} sum_j E[I_i I_j] over the same window
  std::vector<std::size_t> indices;
  std::vector<double> per_index;
};

/// Estimates the clustering hypothesis by simulating the array conditionally
/// on I_i = 1 (exact for this model family) at i in {1, f+k, 2(f+k)}.
NeighborhoodCondition estimate_neighborhood_condition(const BernoulliModel& model, std::uint64_t n,
                                                      std::size_t reps, std::uint64_t seed);

}  // namespace ppconv
