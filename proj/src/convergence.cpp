#include "ppconv/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/poisson.hpp>

#include "ppconv/rng.hpp"

namespace ppconv {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double clip0(double v) { return std::max(v, 0.0); }

double two_sided_z(double alpha) {
  const boost::math::normal standard;
  return boost::math::quantile(boost::math::complement(standard, alpha / 2.0));
}

}  // namespace

// ---------------------------------------------------------------------------
// Measures and laws

double MeasureDescriptor::measure(double a, double b) const {
  if (!(a < b)) return 0.0;
  switch (kind) {
    case Kind::lebesgue_halfline:
      return clip0(b) - clip0(a);
    case Kind::exp_tail:
      return std::exp(-a) - std::exp(-b);
    case Kind::power_law:
      return mass * (std::pow(clip0(b), exponent) - std::pow(clip0(a), exponent));
  }
  return 0.0;
}

double MeasureDescriptor::measure(const IntervalRing& ring) const {
  double total = 0.0;
  for (const auto& [a, b] : ring.intervals()) total += measure(a, b);
  return total;
}

double MeasureDescriptor::truncation(double eps) const {
  if (kind == Kind::exp_tail) return -std::log(eps);
  return kInf;
}

std::string MeasureDescriptor::name() const {
  switch (kind) {
    case Kind::lebesgue_halfline:
      return "lebesgue_halfline";
    case Kind::exp_tail:
      return "exp_tail";
    case Kind::power_law:
      return "power_law";
  }
  return "?";
}

double TargetLaw::cdf(double u) const {
  if (std::isnan(u)) throw Error(Errc::domain, "cdf of NaN");
  switch (kind) {
    case Kind::gumbel:
      return std::exp(-std::exp(-u));
    case Kind::weibull:
      return u <= 0.0 ? 0.0 : -std::expm1(-scale * std::pow(u, shape));
    case Kind::exp_unit:
      return u <= 0.0 ? 0.0 : -std::expm1(-u);
    case Kind::poisson_process:
      break;
  }
  throw Error(Errc::domain, "a Poisson process target has no scalar CDF");
}

std::string TargetLaw::name() const {
  switch (kind) {
    case Kind::gumbel:
      return "gumbel";
    case Kind::weibull:
      return "weibull";
    case Kind::exp_unit:
      return "exp_unit";
    case Kind::poisson_process:
      return "poisson_process(" + measure.name() + ")";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Empirical laws

EmpiricalLaw EmpiricalLaw::from_counts(const std::vector<std::size_t>& counts, double lambda, IntervalRing ring) {
  if (!(lambda >= 0.0)) throw Error(Errc::domain, "lambda(B) must be >= 0");
  EmpiricalLaw law;
  law.ring = std::move(ring);
  law.lambda = lambda;
  law.replicates = counts.size();
  for (std::size_t c : counts) {
    if (c >= law.histogram.size()) law.histogram.resize(c + 1, 0);
    ++law.histogram[c];
  }
  return law;
}

double EmpiricalLaw::frequency(std::size_t k) const {
  if (replicates == 0 || k >= histogram.size()) return 0.0;
  return static_cast<double>(histogram[k]) / static_cast<double>(replicates);
}

double EmpiricalLaw::mean() const {
  if (replicates == 0) return 0.0;
  double s = 0.0;
  for (std::size_t k = 0; k < histogram.size(); ++k) s += static_cast<double>(k) * static_cast<double>(histogram[k]);
  return s / static_cast<double>(replicates);
}

double EmpiricalLaw::variance() const {
  if (replicates < 2) return 0.0;
  const double m = mean();
  double s = 0.0;
  for (std::size_t k = 0; k < histogram.size(); ++k) {
    const double dev = static_cast<double>(k) - m;
    s += dev * dev * static_cast<double>(histogram[k]);
  }
  return s / static_cast<double>(replicates - 1);
}

Estimate consecutive_ratio_statistic(const EmpiricalLaw& law, int k) {
  if (k < 1) throw Error(Errc::domain, "D_k needs k >= 1");
  if (law.replicates < 100) throw Error(Errc::insufficient_replicates, "D_k needs at least 100 replicates");
  const double pk = law.frequency(static_cast<std::size_t>(k));
  const double pk1 = law.frequency(static_cast<std::size_t>(k - 1));
  const double kk = k;
  const double lam = law.lambda;
  const double value = kk * pk - lam * pk1;
  // Var of k*p_k - lam*p_{k-1} with Cov(p_k, p_{k-1}) = -p_k p_{k-1} / R.
  const double var = (kk * kk * pk * (1.0 - pk) + lam * lam * pk1 * (1.0 - pk1) + 2.0 * kk * lam * pk * pk1) /
                     static_cast<double>(law.replicates);
  return {value, std::sqrt(std::max(var, 0.0))};
}

EmpiricalLaw count_distribution(const std::vector<RescaledSample>& samples, const IntervalRing& ring,
                                const TargetLaw& target) {
  if (target.kind != TargetLaw::Kind::poisson_process) {
    throw Error(Errc::domain, "count_distribution needs a Poisson process target");
  }
  std::vector<std::size_t> counts;
  counts.reserve(samples.size());
  for (const auto& s : samples) {
    if (!ring.empty() && ring.upper() > s.materialized_below) {
      throw Error(Errc::support_exceeded, "ring " + ring.describe() + " reaches beyond the simulated range of a sample");
    }
    counts.push_back(ring.count(s));
  }
  return EmpiricalLaw::from_counts(counts, target.measure.measure(ring), ring);
}

// ---------------------------------------------------------------------------
// KS

KsResult ks_distance(std::vector<double> values, const TargetLaw& target) {
  if (values.empty()) throw Error(Errc::empty_sample, "KS distance of an empty sample");
  for (double v : values) {
    if (std::isnan(v)) throw Error(Errc::domain, "KS distance got NaN");
  }
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < values.size()) {
    std::size_t j = i;
    while (j < values.size() && values[j] == values[i]) ++j;
    const double v = values[i];
    const double f = std::isinf(v) ? (v > 0 ? 1.0 : 0.0) : target.cdf(v);
    const double below = static_cast<double>(i) / n;
    const double at = static_cast<double>(j) / n;
    if (!(std::isinf(v) && v < 0)) d = std::max(d, std::abs(f - below));
    if (!(std::isinf(v) && v > 0)) d = std::max(d, std::abs(at - f));
    i = j;
  }
  return {d, values.size()};
}

std::vector<CdfPair> cdf_pairs(std::vector<double> values, const TargetLaw& target) {
  std::sort(values.begin(), values.end());
  std::vector<CdfPair> out;
  const auto n = static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) continue;
    if (i + 1 < values.size() && values[i + 1] == values[i]) continue;
    out.push_back({values[i], static_cast<double>(i + 1) / n, target.cdf(values[i])});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Chi-square

ChiSquare poisson_chi_square(const EmpiricalLaw& law) {
  ChiSquare out;
  if (law.replicates == 0 || !(law.lambda > 0.0)) return out;
  const auto R = static_cast<double>(law.replicates);
  const boost::math::poisson_distribution<double> pois(law.lambda);

  // Bin edges over k = 0..K-1 plus the tail k >= K.
  std::size_t K = std::max<std::size_t>(law.histogram.size(), 1);
  while (boost::math::cdf(boost::math::complement(pois, static_cast<double>(K) - 1.0)) * R >= 1e-9) ++K;

  std::vector<double> expected;
  std::vector<double> observed;
  double e_acc = 0.0;
  double o_acc = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    e_acc += R * boost::math::pdf(pois, static_cast<double>(k));
    o_acc += static_cast<double>(k < law.histogram.size() ? law.histogram[k] : 0);
    if (e_acc >= 5.0) {
      expected.push_back(e_acc);
      observed.push_back(o_acc);
      e_acc = 0.0;
      o_acc = 0.0;
    }
  }
  e_acc += R * boost::math::cdf(boost::math::complement(pois, static_cast<double>(K) - 1.0));
  if (!expected.empty()) {
    expected.back() += e_acc;
    observed.back() += o_acc;
  } else {
    expected.push_back(e_acc);
    observed.push_back(o_acc);
  }
  if (expected.size() < 2) return out;
  for (std::size_t b = 0; b < expected.size(); ++b) {
    const double dev = observed[b] - expected[b];
    out.statistic += dev * dev / expected[b];
  }
  out.df = static_cast<int>(expected.size()) - 1;
  const boost::math::chi_squared_distribution<double> chi(out.df);
  out.p_value = boost::math::cdf(boost::math::complement(chi, out.statistic));
  return out;
}

// ---------------------------------------------------------------------------
// GOF

GofReport poisson_process_gof(const std::vector<EmpiricalLaw>& laws, const GofOptions& options) {
  if (options.k_max < 1) throw Error(Errc::domain, "k_max must be >= 1");
  if (!(options.level > 0.0 && options.level < 1.0)) throw Error(Errc::domain, "level must be in (0, 1)");
  GofReport report;
  report.note =
      "finite battery of rings and k values; passing is a necessary condition for Poisson convergence, not a proof";
  if (laws.empty()) return report;
  report.replicates = laws.front().replicates;
  const double checks = static_cast<double>(laws.size()) * (options.k_max + 2);
  report.alpha_per_check = options.level / checks;
  report.z_threshold = two_sided_z(report.alpha_per_check);
  report.d_threshold = options.d_threshold.value_or(report.z_threshold);

  for (std::size_t b = 0; b < laws.size(); ++b) {
    const auto& law = laws[b];
    GofReport::RingCheck rc;
    rc.ring = law.ring;
    rc.lambda = law.lambda;
    rc.mean = law.mean();
    rc.mean_se = std::sqrt(law.variance() / static_cast<double>(std::max<std::size_t>(law.replicates, 1)));
    const double dev = rc.mean - rc.lambda;
    rc.mean_z = rc.mean_se > 0.0 ? dev / rc.mean_se : (dev == 0.0 ? 0.0 : kInf);
    rc.mean_pass = std::abs(rc.mean_z) <= report.z_threshold;
    rc.chi2 = poisson_chi_square(law);
    rc.chi2_pass = rc.chi2.p_value >= report.alpha_per_check;
    rc.histogram = law.histogram;
    report.pass = report.pass && rc.mean_pass && rc.chi2_pass;
    report.rings.push_back(std::move(rc));

    const auto R = static_cast<double>(law.replicates);
    for (int k = 1; k <= options.k_max; ++k) {
      const auto est = consecutive_ratio_statistic(law, k);
      // standardized with the se under the target law, the plug-in se collapses
      // whenever the observed cell k happens to be low
      double se = est.std_error;
      bool tested = false;
      if (law.lambda > 0.0) {
        const boost::math::poisson_distribution<double> pois(law.lambda);
        const double pk = boost::math::pdf(pois, static_cast<double>(k));
        const double pk1 = boost::math::pdf(pois, static_cast<double>(k - 1));
        const double kk = k;
        const double lam = law.lambda;
        se = std::sqrt((kk * kk * pk * (1.0 - pk) + lam * lam * pk1 * (1.0 - pk1) + 2.0 * kk * lam * pk * pk1) / R);
        tested = R * std::min(pk, pk1) >= options.min_expected;
      }
      const double z = se > 0.0 ? std::abs(est.value) / se : (est.value == 0.0 ? 0.0 : kInf);
      const bool pass = !tested || z <= report.d_threshold;
      report.dk.push_back({b, k, est.value, se, z, report.d_threshold, tested, pass});
      report.pass = report.pass && pass;
    }
  }
  return report;
}

GofReport poisson_process_gof(const std::vector<RescaledSample>& samples, const std::vector<IntervalRing>& rings,
                              const TargetLaw& target, const GofOptions& options) {
  if (rings.size() < 3) throw Error(Errc::config, "the goodness-of-fit battery needs at least 3 rings");
  std::vector<EmpiricalLaw> laws;
  laws.reserve(rings.size());
  for (const auto& ring : rings) laws.push_back(count_distribution(samples, ring, target));
  return poisson_process_gof(laws, options);
}

// ---------------------------------------------------------------------------
// Sandwich bounds

SandwichReport sandwich_bound_check(const std::vector<SandwichReplicate>& replicates, double s, double r,
                                    double theta_w, int d, const std::vector<double>& u_grid, double tolerance_se) {
  if (!(s > 0.0 && s <= 1.0)) throw Error(Errc::domain, "s must be in (0, 1]");
  if (!(r >= 1.0)) throw Error(Errc::domain, "r must be >= 1");
  if (replicates.empty()) throw Error(Errc::empty_sample, "sandwich check needs replicates");
  SandwichReport rep;
  rep.replicates = replicates.size();
  rep.tolerance_se = tolerance_se;
  for (const auto& x : replicates) {
    // Adding points only shrinks cells, so minima over a superset layer are smaller.
    const bool ok = x.nested && x.mid_mu1 <= x.lower_mu1 && x.upper_mu2 <= x.mid_mu2;
    if (!ok) ++rep.ordering_violations;
  }
  const auto n = static_cast<double>(replicates.size());
  for (double u : u_grid) {
    SandwichReport::Row row{};
    row.u = u;
    double hits_s = 0.0;
    double hits_r = 0.0;
    for (const auto& x : replicates) {
      hits_s += s * x.mid_theta > u ? 1.0 : 0.0;
      hits_r += r * x.mid_theta > u ? 1.0 : 0.0;
    }
    row.tail_s = hits_s / n;
    row.tail_r = hits_r / n;
    row.se_s = std::sqrt(row.tail_s * (1.0 - row.tail_s) / n);
    row.se_r = std::sqrt(row.tail_r * (1.0 - row.tail_r) / n);
    const double upow = std::pow(std::max(u, 0.0), d + 1);
    row.bound_s = std::exp(-s * theta_w * upow);
    row.bound_r = std::exp(-r * theta_w * upow);
    row.pass_s = row.tail_s <= row.bound_s + tolerance_se * row.se_s + 1e-15;
    row.pass_r = row.tail_r >= row.bound_r - tolerance_se * row.se_r - 1e-15;
    rep.pass = rep.pass && row.pass_s && row.pass_r;
    rep.rows.push_back(row);
  }
  rep.pass = rep.pass && rep.ordering_violations == 0;
  return rep;
}

// ---------------------------------------------------------------------------
// Target samplers

RescaledSample sample_target_process(const MeasureDescriptor& measure, double lo, double hi, std::uint64_t seed,
                                     std::uint64_t stream) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) throw Error(Errc::domain, "need finite lo < hi");
  Philox4x32 rng(seed, stream);
  const double total = measure.measure(lo, hi);
  std::poisson_distribution<long> count(total);
  const long n = total > 0.0 ? count(rng) : 0;
  std::vector<double> atoms;
  atoms.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    const double v = rng.uniform();
    switch (measure.kind) {
      case MeasureDescriptor::Kind::lebesgue_halfline: {
        const double a = clip0(lo);
        atoms.push_back(a + v * (hi - a));
        break;
      }
      case MeasureDescriptor::Kind::exp_tail: {
        const double ea = std::exp(-lo);
        const double eb = std::exp(-hi);
        atoms.push_back(-std::log(ea - v * (ea - eb)));
        break;
      }
      case MeasureDescriptor::Kind::power_law: {
        const double pa = std::pow(clip0(lo), measure.exponent);
        const double pb = std::pow(clip0(hi), measure.exponent);
        atoms.push_back(std::pow(pa + v * (pb - pa), 1.0 / measure.exponent));
        break;
      }
    }
  }
  RescaledSample::Meta meta;
  meta.transform = "target:" + measure.name();
  meta.seed = seed;
  meta.stream = stream;
  RescaledSample out(std::move(atoms), std::move(meta));
  out.materialized_below = hi;
  return out;
}

}  // namespace ppconv
