#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ppconv/interval_ring.hpp"
#include "ppconv/sample.hpp"
#include "ppconv/voronoi.hpp"

namespace ppconv {

/// Closed-form intensity measures of the limit processes.
struct MeasureDescriptor {
  enum class Kind {
    lebesgue_halfline,  ///< Lebesgue measure on [0, inf)
    exp_tail,           ///< M([u, inf)) = e^{-u} on R
    power_law,          ///< M([0, u]) = mass * u^exponent on [0, inf)
  };

  Kind kind = Kind::lebesgue_halfline;
  double mass = 1.0;
  double exponent = 2.0;

  static MeasureDescriptor lebesgue_halfline() { return {Kind::lebesgue_halfline, 1.0, 1.0}; }
  static MeasureDescriptor exp_tail() { return {Kind::exp_tail, 1.0, 1.0}; }
  static MeasureDescriptor power_law(double mass, double exponent) { return {Kind::power_law, mass, exponent}; }

  /// M((a, b)).
  double measure(double a, double b) const;
  double measure(const IntervalRing& ring) const;
  /// Upper cutoff where the tail mass beyond it drops below eps (exp_tail),
  /// +inf for the others.
  double truncation(double eps = 1e-6) const;
  std::string name() const;
};

/// Limit laws the lab compares against.
struct TargetLaw {
  enum class Kind { poisson_process, gumbel, weibull, exp_unit };

  Kind kind = Kind::poisson_process;
  MeasureDescriptor measure;
  double shape = 1.0;  ///< weibull: d + 1
  double scale = 1.0;  ///< weibull: mu(W) in P(min > u) = e^{-scale u^shape}

  static TargetLaw poisson(MeasureDescriptor m) { return {Kind::poisson_process, m, 1.0, 1.0}; }
  static TargetLaw gumbel() { return {Kind::gumbel, {}, 1.0, 1.0}; }
  static TargetLaw weibull(double shape, double mass) { return {Kind::weibull, {}, shape, mass}; }
  static TargetLaw exp_unit() { return {Kind::exp_unit, {}, 1.0, 1.0}; }

  /// CDF of the scalar laws; throws for poisson_process.
  double cdf(double u) const;
  std::string name() const;
};

/// Counts xi(B) over replicates for one ring B.
struct EmpiricalLaw {
  IntervalRing ring;
  double lambda = 0.0;  ///< M(B) under the target
  std::vector<std::size_t> histogram;  ///< histogram[k] = #replicates with xi(B) = k
  std::size_t replicates = 0;

  static EmpiricalLaw from_counts(const std::vector<std::size_t>& counts, double lambda, IntervalRing ring = {});

  double frequency(std::size_t k) const;
  double mean() const;
  double variance() const;  ///< unbiased sample variance
};

/// D_k = k P(xi(B)=k) - lambda(B) P(xi(B)=k-1) with its multinomial standard error.
Estimate consecutive_ratio_statistic(const EmpiricalLaw& law, int k);

EmpiricalLaw count_distribution(const std::vector<RescaledSample>& samples, const IntervalRing& ring,
                                const TargetLaw& target);

struct KsResult {
  double statistic;
  std::size_t n;
};

/// sup |F_n - F|. Values may be +-inf (censored extremes); NaN is rejected.
KsResult ks_distance(std::vector<double> values, const TargetLaw& target);

/// Empirical CDF evaluated at the sorted sample points, paired with F.
struct CdfPair {
  double u;
  double empirical;
  double target;
};
std::vector<CdfPair> cdf_pairs(std::vector<double> values, const TargetLaw& target);

/// Poisson chi-square goodness of fit for a count histogram. Bins with
/// expected count below 5 are merged.
struct ChiSquare {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
};
ChiSquare poisson_chi_square(const EmpiricalLaw& law);

struct GofOptions {
  double level = 0.01;
  int k_max = 6;
  /// Replaces the Bonferroni z threshold of the D_k checks when set.
  std::optional<double> d_threshold;
  /// D_k is only tested when both cells k-1 and k expect this many replicates
  /// under Poisson(lambda); sparser cells make the plug-in se useless.
  double min_expected = 5.0;
};

struct GofReport {
  struct DkCheck {
    std::size_t ring;
    int k;
    double value;
    double std_error;
    double z;
    double threshold;
    bool tested;
    bool pass;
  };
  struct RingCheck {
    IntervalRing ring;
    double lambda;
    double mean;
    double mean_se;
    double mean_z;
    bool mean_pass;
    ChiSquare chi2;
    bool chi2_pass;
    std::vector<std::size_t> histogram;
  };

  std::vector<RingCheck> rings;
  std::vector<DkCheck> dk;
  std::size_t replicates = 0;
  double alpha_per_check = 0.0;
  double z_threshold = 0.0;  ///< Bonferroni threshold for mean and D_k checks
  double d_threshold = 0.0;  ///< threshold actually applied to D_k
  bool pass = true;
  std::string note;
};

/// Necessary-condition battery for Poisson process convergence on a finite
/// family of rings: D_k for k = 1..k_max, chi-square against Poisson(lambda(B))
/// and E xi(B) = lambda(B), Bonferroni-corrected over all checks.
GofReport poisson_process_gof(const std::vector<RescaledSample>& samples, const std::vector<IntervalRing>& rings,
                              const TargetLaw& target, const GofOptions& options = {});
GofReport poisson_process_gof(const std::vector<EmpiricalLaw>& laws, const GofOptions& options = {});

/// Per-replicate minima for the coupled layers. Each value is
/// alpha2 t^{(d+2)/(d+1)} min_x nu(B(x, C(x, layer))) for the indicated
/// measure nu and layer (+inf when no atom below the cap).
struct SandwichReplicate {
  double lower_mu1;
  double mid_mu1;
  double mid_theta;  ///< the statistic S whose tails are bounded
  double mid_mu2;
  double upper_mu2;
  bool nested;  ///< lower subset of mid subset of upper
};

struct SandwichReport {
  struct Row {
    double u;
    double tail_s;   ///< P(s S > u)
    double se_s;
    double bound_s;  ///< exp(-s theta(W) u^{d+1}), upper bound
    bool pass_s;
    double tail_r;   ///< P(r S > u)
    double se_r;
    double bound_r;  ///< exp(-r theta(W) u^{d+1}), lower bound
    bool pass_r;
  };
  std::vector<Row> rows;
  std::size_t replicates = 0;
  std::size_t ordering_violations = 0;  ///< pathwise inequalities or nesting failed
  double tolerance_se = 3.0;
  bool pass = true;
};

SandwichReport sandwich_bound_check(const std::vector<SandwichReplicate>& replicates, double s, double r,
                                    double theta_w, int d, const std::vector<double>& u_grid,
                                    double tolerance_se = 3.0);

/// Direct sample of the limit Poisson process restricted to (lo, hi).
RescaledSample sample_target_process(const MeasureDescriptor& measure, double lo, double hi, std::uint64_t seed,
                                     std::uint64_t stream = 0);

}  // namespace ppconv
