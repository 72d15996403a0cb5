#include "ppconv/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ppconv/convergence.hpp"
#include "ppconv/density.hpp"
#include "ppconv/parallel.hpp"
#include "ppconv/point_process.hpp"
#include "ppconv/rng.hpp"
#include "ppconv/runs.hpp"
#include "ppconv/tessellation.hpp"
#include "ppconv/voronoi.hpp"

namespace ppconv {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// stream purposes
constexpr std::uint32_t kRunsStream = 1;
constexpr std::uint32_t kTessStream = 2;
constexpr std::uint32_t kTargetStream = 3;

[[noreturn]] void config_error(const std::string& msg) { throw Error(Errc::config, msg); }

// JSON has no infinities; keep them readable as strings.
Json num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

std::uint64_t point_seed(std::uint64_t master, std::size_t index) {
  // splitmix64 finalizer
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(index) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    config_error(std::string("field '") + key + "': " + e.what());
  }
}

const Json& section(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_object()) config_error(std::string("missing object '") + key + "'");
  return j.at(key);
}

std::vector<double> doubles(const Json& j, const char* what) {
  if (!j.is_array()) config_error(std::string(what) + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) config_error(std::string(what) + " must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

Box parse_box(const Json& j, const char* what) {
  if (!j.is_object() || !j.contains("lo") || !j.contains("hi")) {
    config_error(std::string(what) + " needs 'lo' and 'hi' arrays");
  }
  try {
    return Box(doubles(j.at("lo"), what), doubles(j.at("hi"), what));
  } catch (const Error& e) {
    config_error(std::string(what) + ": " + e.what());
  }
}

DensityModel parse_density(const Json& j) {
  const auto kind = get_or<std::string>(j, "kind", "");
  const Box support = parse_box(j.contains("support") ? j.at("support") : Json(), "density.support");
  const int dim = support.dim();
  try {
    if (kind == "constant") return DensityModel::constant(dim, get_or<double>(j, "value", 1.0), support);
    if (kind == "linear") {
      return DensityModel::linear(dim, get_or<double>(j, "a", 1.0), get_or<double>(j, "b", 0.0), support);
    }
    if (kind == "step") {
      if (!j.contains("cells") || !j.contains("values")) config_error("step density needs 'cells' and 'values'");
      return DensityModel::step(support, j.at("cells").get<std::vector<int>>(), doubles(j.at("values"), "values"));
    }
  } catch (const Error& e) {
    if (e.code() == Errc::config) throw;
    config_error(std::string("density: ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    config_error(std::string("density: ") + e.what());
  }
  config_error("density.kind must be one of constant, linear, step (got '" + kind + "')");
}

Window parse_window(const Json& j) {
  if (j.is_object() && j.contains("polygon")) {
    ConvexPolygon poly;
    try {
      for (const auto& v : j.at("polygon")) poly.vertices.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
      return Window(std::move(poly));
    } catch (const Error& e) {
      config_error(std::string("window: ") + e.what());
    } catch (const nlohmann::json::exception& e) {
      config_error(std::string("window: ") + e.what());
    }
  }
  return Window(parse_box(j, "window"));
}

std::vector<IntervalRing> parse_rings(const Json& j) {
  std::vector<IntervalRing> rings;
  if (!j.is_array()) config_error("rings must be an array of interval lists");
  for (const auto& ring : j) {
    std::vector<IntervalRing::Interval> ivs;
    if (!ring.is_array()) config_error("each ring is an array of [a, b] pairs");
    for (const auto& iv : ring) {
      if (!iv.is_array() || iv.size() != 2 || !iv[0].is_number() || !iv[1].is_number()) {
        config_error("each ring interval is a pair [a, b]");
      }
      ivs.emplace_back(iv[0].get<double>(), iv[1].get<double>());
    }
    try {
      rings.emplace_back(std::move(ivs));
    } catch (const Error& e) {
      config_error(std::string("ring: ") + e.what());
    }
    if (rings.back().empty()) config_error("rings must not be empty");
  }
  return rings;
}

std::vector<IntervalRing> default_rings(MeasureDescriptor::Kind kind) {
  switch (kind) {
    case MeasureDescriptor::Kind::lebesgue_halfline:
      return {IntervalRing({{0.0, 1.0}}), IntervalRing({{1.0, 2.5}}), IntervalRing({{0.0, 1.0}, {1.5, 3.0}})};
    case MeasureDescriptor::Kind::exp_tail:
      return {IntervalRing({{0.0, 14.0}}), IntervalRing({{1.0, 3.0}}), IntervalRing({{-1.0, 0.0}, {2.0, 14.0}})};
    case MeasureDescriptor::Kind::power_law:
      return {IntervalRing({{0.0, 0.5}}), IntervalRing({{0.5, 1.2}}), IntervalRing({{0.0, 0.3}, {0.7, 1.5}})};
  }
  return {};
}

std::vector<IntervalRing> rings_or_default(const Json& raw, MeasureDescriptor::Kind kind) {
  return raw.contains("rings") ? parse_rings(raw.at("rings")) : default_rings(kind);
}

double max_upper(const std::vector<IntervalRing>& rings) {
  double u = 0.0;
  for (const auto& r : rings) u = std::max(u, r.upper());
  return u;
}

GofOptions gof_options(const Json& raw) {
  GofOptions o;
  o.level = get_or<double>(raw, "level", 0.01);
  o.k_max = get_or<int>(raw, "k_max", 6);
  if (raw.contains("d_threshold")) o.d_threshold = get_or<double>(raw, "d_threshold", 4.0);
  o.min_expected = get_or<double>(raw, "min_expected", 5.0);
  return o;
}

std::string ring_label(std::size_t b) { return "ring" + std::to_string(b); }

// --------------------------------------------------------------------------
// Check bookkeeping

class Checks {
 public:
  void add(const std::string& name, double statistic, double std_error, double threshold, const std::string& rule,
           bool pass) {
    list_.push_back({{"name", name},
                     {"statistic", num(statistic)},
                     {"std_error", num(std_error)},
                     {"threshold", num(threshold)},
                     {"rule", rule},
                     {"pass", pass}});
    pass_ = pass_ && pass;
  }
  Json take() { return std::move(list_); }
  bool pass() const { return pass_; }

 private:
  Json list_ = Json::array();
  bool pass_ = true;
};

Json gof_json(const GofReport& g) {
  Json rings = Json::array();
  for (std::size_t b = 0; b < g.rings.size(); ++b) {
    const auto& r = g.rings[b];
    rings.push_back({{"ring", r.ring.describe()},
                     {"lambda", num(r.lambda)},
                     {"lambda_exact", true},
                     {"mean", num(r.mean)},
                     {"mean_se", num(r.mean_se)},
                     {"mean_z", num(r.mean_z)},
                     {"mean_pass", r.mean_pass},
                     {"chi2", num(r.chi2.statistic)},
                     {"chi2_df", r.chi2.df},
                     {"chi2_p", num(r.chi2.p_value)},
                     {"chi2_pass", r.chi2_pass},
                     {"histogram", r.histogram}});
  }
  Json dk = Json::array();
  for (const auto& c : g.dk) {
    dk.push_back({{"ring", c.ring},
                  {"k", c.k},
                  {"D", num(c.value)},
                  {"std_error", num(c.std_error)},
                  {"z", num(c.z)},
                  {"threshold", num(c.threshold)},
                  {"tested", c.tested},
                  {"pass", c.pass}});
  }
  return {{"replicates", g.replicates},  {"alpha_per_check", num(g.alpha_per_check)},
          {"z_threshold", num(g.z_threshold)}, {"d_threshold", num(g.d_threshold)},
          {"rings", std::move(rings)},   {"dk", std::move(dk)},
          {"pass", g.pass},              {"note", g.note}};
}

void add_gof_checks(Checks& checks, const GofReport& g, const std::string& prefix) {
  std::size_t failed = 0;
  for (const auto& c : g.dk) failed += c.pass ? 0 : 1;
  for (const auto& r : g.rings) failed += (r.mean_pass ? 0 : 1) + (r.chi2_pass ? 0 : 1);
  double worst = 0.0;
  for (const auto& c : g.dk) worst = c.tested ? std::max(worst, c.z) : worst;
  checks.add(prefix + "gof_dk_max_z", worst, 0.0, g.d_threshold, "statistic <= threshold", worst <= g.d_threshold);
  checks.add(prefix + "gof_failed_checks", static_cast<double>(failed), 0.0, 0.0, "statistic <= threshold",
             g.pass);
}

struct Accumulator {
  double sum = 0.0;
  double sum2 = 0.0;
  std::size_t n = 0;
  void add(double v) {
    sum += v;
    sum2 += v * v;
    ++n;
  }
  double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
  double se() const {
    if (n < 2) return 0.0;
    const double m = mean();
    const double var = std::max(0.0, (sum2 - static_cast<double>(n) * m * m) / static_cast<double>(n - 1));
    return std::sqrt(var / static_cast<double>(n));
  }
};

void add_cdf_rows(Report& report, double t, const std::string& statistic, const std::vector<double>& values,
                  const TargetLaw& law) {
  for (const auto& p : cdf_pairs(values, law)) report.cdf.push_back({t, statistic, p.u, p.empirical, p.target});
}

// --------------------------------------------------------------------------
// runs

BernoulliModel parse_bernoulli(const Json& j) {
  const auto kind = get_or<std::string>(j, "kind", "iid");
  const ProbabilitySchedule q{get_or<double>(j, "scale", 1.0), get_or<double>(j, "exponent", 0.0)};
  const int k = get_or<int>(j, "k", 1);
  try {
    if (kind == "iid") return BernoulliModel::iid(q, k);
    if (kind == "block") return BernoulliModel::block(q, get_or<int>(j, "m", 1), k);
  } catch (const Error& e) {
    config_error(std::string("model: ") + e.what());
  }
  config_error("model.kind must be iid or block (got '" + kind + "')");
}

Json run_runs_point(const ExperimentConfig& cfg, std::size_t index, Report& report, Checks& checks) {
  const auto& raw = cfg.raw;
  const auto model = parse_bernoulli(section(raw, "model"));
  const auto n = static_cast<std::uint64_t>(cfg.schedule[index]);
  const auto rings = rings_or_default(raw, MeasureDescriptor::Kind::lebesgue_halfline);
  const double y = model.y(n);
  const double u_max = std::max(max_upper(rings), get_or<double>(raw, "arrival_horizon", 10.0));
  const std::size_t horizon = model.horizon(n, u_max);
  const auto seed = point_seed(cfg.seed, index);
  const std::string tag = "n=" + std::to_string(n) + ":";

  struct Rep {
    RescaledSample sample;
    double arrival;
  };
  const auto reps = parallel_map(cfg.replicates, cfg.workers, [&](std::size_t r) {
    const auto bits = simulate_bernoulli_array(model, n, horizon, seed, stream_id(r, kRunsStream));
    const auto ind = run_indicators(bits, model.k);
    auto sample = build_run_process(ind, y);
    sample.meta.scale = static_cast<double>(n);
    sample.meta.seed = seed;
    sample.meta.stream = stream_id(r, kRunsStream);
    const double arrival = ind.count() ? static_cast<double>(ind.ones().front()) * y : kInf;
    return Rep{std::move(sample), arrival};
  });

  std::vector<RescaledSample> samples;
  std::vector<double> arrivals;
  samples.reserve(reps.size());
  for (std::size_t r = 0; r < reps.size(); ++r) {
    arrivals.push_back(reps[r].arrival);
    report.extremes.push_back({r, static_cast<double>(n), "first_arrival", reps[r].arrival});
    for (std::size_t b = 0; b < rings.size(); ++b) {
      report.counts.push_back({r, static_cast<double>(n), ring_label(b), static_cast<double>(rings[b].count(reps[r].sample))});
    }
    samples.push_back(reps[r].sample);
  }
  const auto target = TargetLaw::poisson(MeasureDescriptor::lebesgue_halfline());
  const auto gof = poisson_process_gof(samples, rings, target, gof_options(raw));
  add_gof_checks(checks, gof, tag);

  const auto censored = static_cast<std::size_t>(std::count(arrivals.begin(), arrivals.end(), kInf));
  const auto ks = ks_distance(arrivals, TargetLaw::exp_unit());
  const double ks_tol = get_or<double>(raw, "ks_tolerance", 0.03);
  checks.add(tag + "ks_first_arrival_exp1", ks.statistic, 0.0, ks_tol, "statistic <= threshold",
             ks.statistic <= ks_tol);
  add_cdf_rows(report, static_cast<double>(n), "first_arrival", arrivals, TargetLaw::exp_unit());

  Json out = {{"n", n},
              {"y_n", num(y)},
              {"p_n", num(model.q.at(n))},
              {"f_n", model.dependence_range()},
              {"horizon_bits", horizon},
              {"u_max", num(u_max)},
              {"censored_first_arrivals", censored},
              {"ks_first_arrival", {{"statistic", num(ks.statistic)}, {"n", ks.n}, {"target", "exp_unit"}}},
              {"gof", gof_json(gof)}};

  const auto cond_reps = get_or<std::size_t>(raw, "condition_reps", 100000);
  if (cond_reps > 0) {
    const auto cond = estimate_neighborhood_condition(model, n, cond_reps, seed ^ 0xC0FFEEULL);
    out["neighborhood_condition"] = {{"estimate", num(cond.condition.value)},
                                     {"std_error", num(cond.condition.std_error)},
                                     {"pairwise_sum", num(cond.pairwise_sum.value)},
                                     {"pairwise_sum_se", num(cond.pairwise_sum.std_error)},
                                     {"indices", cond.indices},
                                     {"per_index", cond.per_index}};
    if (raw.contains("condition_threshold")) {
      const double thr = get_or<double>(raw, "condition_threshold", 0.05);
      checks.add(tag + "neighborhood_condition", cond.condition.value, cond.condition.std_error, thr,
                 "statistic < threshold", cond.condition.value < thr);
    }
  }
  return out;
}

// --------------------------------------------------------------------------
// inradius

Json run_inradius_point(const ExperimentConfig& cfg, std::size_t index, Report& report, Checks& checks, bool hat) {
  const auto& raw = cfg.raw;
  const auto density = parse_density(section(raw, "density"));
  const auto window = parse_window(raw.contains("window") ? raw.at("window") : Json());
  const double t = cfg.schedule[index];
  const auto seed = point_seed(cfg.seed, index);
  const auto rings = rings_or_default(raw, MeasureDescriptor::Kind::exp_tail);
  const auto variant = hat ? InradiusVariant::two_pow_d_c : InradiusVariant::two_c;
  const bool compare = hat && get_or<bool>(raw, "compare_variants", true);
  const auto tail = MeasureDescriptor::exp_tail();
  const double cutoff = tail.truncation(1e-6);
  const auto u_grid = raw.contains("u_grid") ? doubles(raw.at("u_grid"), "u_grid") : std::vector<double>{0.0, 1.0, 2.0};
  const std::string tag = "t=" + std::to_string(static_cast<long long>(t)) + ":";

  struct Rep {
    RescaledSample sample;
    std::size_t mismatched = 0;
    double diff_abs = 0.0;
  };
  const auto reps = parallel_map(cfg.replicates, cfg.workers, [&](std::size_t r) {
    const auto stream = stream_id(r, kTessStream);
    Rep rep{inradius_process(density, window, t, seed, variant, stream)};
    if (compare) {
      const auto other = inradius_process(density, window, t, seed, InradiusVariant::two_c, stream);
      if (other.atoms.size() != rep.sample.atoms.size()) {
        rep.mismatched = std::max(other.atoms.size(), rep.sample.atoms.size());
      } else {
        for (std::size_t i = 0; i < other.atoms.size(); ++i) rep.mismatched += other.atoms[i] != rep.sample.atoms[i];
      }
      for (const auto& ring : rings) {
        rep.diff_abs += std::abs(static_cast<double>(ring.count(other)) - static_cast<double>(ring.count(rep.sample)));
      }
    }
    return rep;
  });

  std::vector<RescaledSample> samples;
  std::vector<double> maxima;
  std::vector<Accumulator> tails(u_grid.size());
  std::size_t resims = 0;
  std::size_t mismatched = 0;
  Accumulator diff;
  for (std::size_t r = 0; r < reps.size(); ++r) {
    const auto& s = reps[r].sample;
    const double mx = extreme_statistics(s).max;
    maxima.push_back(mx);
    report.extremes.push_back({r, t, "max", mx});
    for (std::size_t i = 0; i < u_grid.size(); ++i) {
      const double c = static_cast<double>(s.count_open(u_grid[i], cutoff));
      tails[i].add(c);
      report.counts.push_back({r, t, "tail_u=" + std::to_string(u_grid[i]), c});
    }
    for (std::size_t b = 0; b < rings.size(); ++b) {
      report.counts.push_back({r, t, ring_label(b), static_cast<double>(rings[b].count(s))});
    }
    resims += s.resimulations;
    mismatched += reps[r].mismatched;
    diff.add(reps[r].diff_abs);
    samples.push_back(s);
  }

  Json tail_rows = Json::array();
  for (std::size_t i = 0; i < u_grid.size(); ++i) {
    const double expected = tail.measure(u_grid[i], cutoff);
    const double z = tails[i].se() > 0 ? (tails[i].mean() - expected) / tails[i].se() : 0.0;
    tail_rows.push_back({{"u", num(u_grid[i])},
                         {"cutoff", num(cutoff)},
                         {"mean_count", num(tails[i].mean())},
                         {"std_error", num(tails[i].se())},
                         {"expected", num(expected)},
                         {"expected_exact", true}});
    checks.add(tag + "tail_mean_u=" + std::to_string(u_grid[i]), tails[i].mean(), tails[i].se(),
               expected, "|statistic - threshold| <= 3 std_error", std::abs(z) <= 3.0);
  }

  const auto ks = ks_distance(maxima, TargetLaw::gumbel());
  const double ks_tol = get_or<double>(raw, "ks_tolerance", 0.05);
  checks.add(tag + "ks_max_gumbel", ks.statistic, 0.0, ks_tol, "statistic <= threshold", ks.statistic <= ks_tol);
  add_cdf_rows(report, t, "max", maxima, TargetLaw::gumbel());

  Json out = {{"t", num(t)},
              {"variant", hat ? "two_pow_d_c" : "two_c"},
              {"window_mass", num(region_mass(density, window))},
              {"resimulations", resims},
              {"ks_max", {{"statistic", num(ks.statistic)}, {"n", ks.n}, {"target", "gumbel"}}},
              {"tail_means", std::move(tail_rows)}};

  if (get_or<bool>(raw, "gof", true)) {
    const auto gof = poisson_process_gof(samples, rings, TargetLaw::poisson(tail), gof_options(raw));
    add_gof_checks(checks, gof, tag);
    out["gof"] = gof_json(gof);
  }
  if (compare) {
    out["variant_comparison"] = {{"mismatched_atoms", mismatched},
                                 {"mean_abs_count_difference", num(diff.mean())},
                                 {"std_error", num(diff.se())}};
    if (get_or<bool>(raw, "expect_identical_variants", false)) {
      checks.add(tag + "variants_identical", static_cast<double>(mismatched), 0.0, 0.0, "statistic == threshold",
                 mismatched == 0);
    }
  }
  return out;
}

// --------------------------------------------------------------------------
// circumradius

struct Alpha2 {
  double value;
  double std_error;
  bool exact;
  double p_hat = kInf;
  double p_se = 0.0;
};

Alpha2 resolve_alpha2(const Json& raw, int d, std::uint64_t seed) {
  const Json a = raw.contains("alpha2") ? raw.at("alpha2") : Json::object();
  if (a.contains("value")) return {get_or<double>(a, "value", 1.0), get_or<double>(a, "std_error", 0.0), false};
  if (d == 1 && !get_or<bool>(a, "estimate_in_d1", false)) return {1.0, 0.0, true, 0.5, 0.0};
  const auto samples = get_or<std::size_t>(a, "samples", 1000000);
  const auto est = estimate_p_k(d, d + 1, samples, get_or<std::uint64_t>(a, "seed", seed));
  const double v = alpha2(d, est.value);
  // delta method: alpha2 ~ p^{1/(d+1)}
  return {v, v * est.std_error / (est.value * (d + 1)), false, est.value, est.std_error};
}

Json run_circumradius_point(const ExperimentConfig& cfg, std::size_t index, Report& report, Checks& checks,
                            const Alpha2& a2) {
  const auto& raw = cfg.raw;
  const auto density = parse_density(section(raw, "density"));
  const auto window = parse_window(raw.contains("window") ? raw.at("window") : Json());
  const int d = density.dim();
  const double t = cfg.schedule[index];
  const auto seed = point_seed(cfg.seed, index);
  const double mass = region_mass(density, window);
  const auto measure = MeasureDescriptor::power_law(mass, d + 1);
  const auto rings = rings_or_default(raw, MeasureDescriptor::Kind::power_law);
  const auto u_grid = raw.contains("u_grid") ? doubles(raw.at("u_grid"), "u_grid") : std::vector<double>{0.5, 1.0};
  // min statistic exceeds u_cap with probability e^{-30}
  const double u_cap = std::pow(30.0 / mass, 1.0 / (d + 1));
  double cap = std::max(u_cap, max_upper(rings));
  for (double u : u_grid) cap = std::max(cap, u);
  const std::string tag = "t=" + std::to_string(static_cast<long long>(t)) + ":";

  const auto samples = parallel_map(cfg.replicates, cfg.workers, [&](std::size_t r) {
    return circumradius_process(density, window, t, seed, a2.value, stream_id(r, kTessStream), cap);
  });

  std::vector<double> minima;
  std::vector<Accumulator> heads(u_grid.size());
  std::size_t dropped = 0;
  std::size_t above = 0;
  for (std::size_t r = 0; r < samples.size(); ++r) {
    const auto& s = samples[r];
    const double mn = extreme_statistics(s).min;
    minima.push_back(mn);
    report.extremes.push_back({r, t, "min", mn});
    for (std::size_t i = 0; i < u_grid.size(); ++i) {
      const double c = static_cast<double>(s.count_open(0.0, u_grid[i]));
      heads[i].add(c);
      report.counts.push_back({r, t, "head_u=" + std::to_string(u_grid[i]), c});
    }
    for (std::size_t b = 0; b < rings.size(); ++b) {
      report.counts.push_back({r, t, ring_label(b), static_cast<double>(rings[b].count(s))});
    }
    dropped += s.dropped_unbounded;
    above += s.above_cap;
  }

  const auto law = TargetLaw::weibull(d + 1, mass);
  const auto ks = ks_distance(minima, law);
  const double rel = a2.exact ? 0.0 : a2.std_error / a2.value;
  const double ks_tol = get_or<double>(raw, "ks_tolerance", 0.05) + (d + 1) / std::numbers::e * 3.0 * rel;
  checks.add(tag + "ks_min_weibull", ks.statistic, 0.0, ks_tol, "statistic <= threshold", ks.statistic <= ks_tol);
  add_cdf_rows(report, t, "min", minima, law);

  const double drift = get_or<double>(raw, "drift_allowance", 0.0);
  Json head_rows = Json::array();
  for (std::size_t i = 0; i < u_grid.size(); ++i) {
    const double expected = measure.measure(0.0, u_grid[i]);
    head_rows.push_back({{"u", num(u_grid[i])},
                         {"mean_count", num(heads[i].mean())},
                         {"std_error", num(heads[i].se())},
                         {"limit", num(expected)},
                         {"limit_exact", true}});
    const double dev = std::abs(heads[i].mean() - expected);
    checks.add(tag + "head_mean_u=" + std::to_string(u_grid[i]), heads[i].mean(), heads[i].se(), expected,
               "|statistic - threshold| <= 3 std_error + drift_allowance",
               dev <= 3.0 * heads[i].se() + drift);
  }

  Json out = {{"t", num(t)},
              {"s_t", num(circumradius_scale(d, t, a2.value))},
              {"window_mass", num(mass)},
              {"cap", num(cap)},
              {"dropped_unbounded", dropped},
              {"above_cap", above},
              {"ks_min", {{"statistic", num(ks.statistic)}, {"n", ks.n}, {"target", "weibull"}, {"tolerance", num(ks_tol)}}},
              {"head_means", std::move(head_rows)}};
  if (get_or<bool>(raw, "gof", false)) {
    const auto gof = poisson_process_gof(samples, rings, TargetLaw::poisson(measure), gof_options(raw));
    add_gof_checks(checks, gof, tag);
    out["gof"] = gof_json(gof);
  }
  return out;
}

// --------------------------------------------------------------------------
// sandwich

bool nested_in(const PointConfig& a, const PointConfig& b) {
  auto rows = [](const PointConfig& c) {
    std::vector<std::vector<double>> v;
    v.reserve(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) v.emplace_back(c[i].begin(), c[i].end());
    std::sort(v.begin(), v.end());
    return v;
  };
  const auto ra = rows(a);
  const auto rb = rows(b);
  return std::includes(rb.begin(), rb.end(), ra.begin(), ra.end());
}

Json run_sandwich_point(const ExperimentConfig& cfg, std::size_t index, Report& report, Checks& checks) {
  const auto& raw = cfg.raw;
  const auto phi = parse_density(section(raw, "phi"));
  const auto f1 = parse_density(section(raw, "f1"));
  const auto f2 = parse_density(section(raw, "f2"));
  const auto window = parse_window(raw.contains("window") ? raw.at("window") : Json());
  const int d = phi.dim();
  if (d > 2) config_error("sandwich experiment supports d in {1, 2}");
  const double t = cfg.schedule[index];
  const double s = get_or<double>(raw, "s", 0.5);
  const double r_factor = get_or<double>(raw, "r", 2.0);
  const auto u_grid = raw.contains("u_grid") ? doubles(raw.at("u_grid"), "u_grid") : std::vector<double>{0.5, 1.0};
  const double a2 = resolve_alpha2(raw, d, cfg.seed).value;
  const auto seed = point_seed(cfg.seed, index);
  const double theta_w = region_mass(phi, window);
  double cap = 10.0;
  for (double u : u_grid) cap = std::max(cap, 2.0 * u / s);
  const double margin = std::max({circumradius_margin(phi, t, a2, cap), circumradius_margin(f1, t, a2, cap),
                                  circumradius_margin(f2, t, a2, cap)});
  Box box = window.bounding_box().dilated(margin);
  for (const auto* dens : {&phi, &f1, &f2}) {
    for (int i = 0; i < d; ++i) {
      box.lo[i] = std::max(box.lo[i], dens->support().lo[i]);
      box.hi[i] = std::min(box.hi[i], dens->support().hi[i]);
    }
  }
  const std::string tag = "t=" + std::to_string(static_cast<long long>(t)) + ":";

  const auto reps = parallel_map(cfg.replicates, cfg.workers, [&](std::size_t r) {
    const auto layers = sample_coupled_sandwich(phi, f1, f2, t, box, seed, stream_id(r, kTessStream));
    auto mn = [&](const PointConfig& c, const DensityModel& nu) {
      return extreme_statistics(circumradius_atoms(c, nu, window, t, a2, box, cap)).min;
    };
    SandwichReplicate rep{};
    rep.lower_mu1 = mn(layers.lower, f1);
    rep.mid_mu1 = mn(layers.mid, f1);
    rep.mid_theta = mn(layers.mid, phi);
    rep.mid_mu2 = mn(layers.mid, f2);
    rep.upper_mu2 = mn(layers.upper, f2);
    rep.nested = nested_in(layers.lower, layers.mid) && nested_in(layers.mid, layers.upper);
    return rep;
  });
  for (std::size_t r = 0; r < reps.size(); ++r) {
    report.extremes.push_back({r, t, "lower_mu1", reps[r].lower_mu1});
    report.extremes.push_back({r, t, "mid_mu1", reps[r].mid_mu1});
    report.extremes.push_back({r, t, "mid_theta", reps[r].mid_theta});
    report.extremes.push_back({r, t, "mid_mu2", reps[r].mid_mu2});
    report.extremes.push_back({r, t, "upper_mu2", reps[r].upper_mu2});
  }
  const double tol = get_or<double>(raw, "tolerance_se", 3.0);
  const auto sw = sandwich_bound_check(reps, s, r_factor, theta_w, d, u_grid, tol);
  Json rows = Json::array();
  for (const auto& row : sw.rows) {
    rows.push_back({{"u", num(row.u)},
                    {"tail_s", num(row.tail_s)},
                    {"se_s", num(row.se_s)},
                    {"upper_bound", num(row.bound_s)},
                    {"pass_upper", row.pass_s},
                    {"tail_r", num(row.tail_r)},
                    {"se_r", num(row.se_r)},
                    {"lower_bound", num(row.bound_r)},
                    {"pass_lower", row.pass_r}});
    checks.add(tag + "sandwich_upper_u=" + std::to_string(row.u), row.tail_s, row.se_s, row.bound_s,
               "statistic <= threshold + tolerance_se * std_error", row.pass_s);
    checks.add(tag + "sandwich_lower_u=" + std::to_string(row.u), row.tail_r, row.se_r, row.bound_r,
               "statistic >= threshold - tolerance_se * std_error", row.pass_r);
  }
  checks.add(tag + "coupling_order_violations", static_cast<double>(sw.ordering_violations), 0.0, 0.0,
             "statistic == threshold", sw.ordering_violations == 0);
  return {{"t", num(t)},         {"s", num(s)},
          {"r", num(r_factor)},  {"theta_W", num(theta_w)},
          {"alpha2", num(a2)},   {"cap", num(cap)},
          {"simulation_box", {{"lo", box.lo}, {"hi", box.hi}}},
          {"ordering_violations", sw.ordering_violations},
          {"rows", std::move(rows)}};
}

// --------------------------------------------------------------------------
// p_k

Json run_pk_point(const ExperimentConfig& cfg, std::size_t index, Checks& checks) {
  const auto& raw = cfg.raw;
  const int d = get_or<int>(raw, "d", 2);
  const int k = get_or<int>(raw, "k", d + 1);
  const auto samples = static_cast<std::size_t>(cfg.schedule[index]);
  const auto est = estimate_p_k(d, k, samples, point_seed(cfg.seed, index));
  Json out = {{"d", d}, {"k", k}, {"samples", samples}, {"p_k", num(est.value)}, {"std_error", num(est.std_error)}};
  if (k == d + 1 && est.value > 0.0) {
    const double a = alpha2(d, est.value);
    out["alpha2"] = num(a);
    out["alpha2_std_error"] = num(a * est.std_error / (est.value * (d + 1)));
  }
  if (raw.contains("expected")) {
    const auto& e = raw.at("expected");
    const double v = get_or<double>(e, "value", 0.0);
    const double tol = get_or<double>(e, "tolerance", 0.01);
    checks.add("samples=" + std::to_string(samples) + ":p_k_expected", est.value, est.std_error, v,
               "|statistic - threshold| <= " + std::to_string(tol), std::abs(est.value - v) <= tol);
  }
  return out;
}

// --------------------------------------------------------------------------
// null calibration

MeasureDescriptor parse_measure(const std::string& name) {
  if (name == "lebesgue_halfline") return MeasureDescriptor::lebesgue_halfline();
  if (name == "exp_tail") return MeasureDescriptor::exp_tail();
  if (name == "power_law") return MeasureDescriptor::power_law(1.0, 2.0);
  config_error("unknown measure '" + name + "'");
}

Json run_null_point(const ExperimentConfig& cfg, std::size_t index, Checks& checks) {
  const auto& raw = cfg.raw;
  const auto trials = static_cast<std::size_t>(cfg.schedule[index]);
  std::vector<std::string> names = {"lebesgue_halfline", "exp_tail", "power_law"};
  if (raw.contains("measures")) names = raw.at("measures").get<std::vector<std::string>>();
  if (names.empty()) config_error("measures must not be empty");
  std::vector<MeasureDescriptor> measures;
  for (const auto& n : names) measures.push_back(parse_measure(n));
  const auto options = gof_options(raw);
  const auto seed = point_seed(cfg.seed, index);

  const auto rejected = parallel_map(trials, cfg.workers, [&](std::size_t trial) {
    const auto& m = measures[trial % measures.size()];
    const auto rings = default_rings(m.kind);
    double lo = kInf;
    double hi = -kInf;
    for (const auto& ring : rings) {
      lo = std::min(lo, ring.lower());
      hi = std::max(hi, ring.upper());
    }
    const auto trial_seed = point_seed(seed, trial);
    std::vector<RescaledSample> samples;
    samples.reserve(cfg.replicates);
    for (std::size_t r = 0; r < cfg.replicates; ++r) {
      samples.push_back(sample_target_process(m, lo, hi, trial_seed, stream_id(r, kTargetStream)));
    }
    return poisson_process_gof(samples, rings, TargetLaw::poisson(m), options).pass ? 0 : 1;
  });
  const auto n_rej = static_cast<std::size_t>(std::count(rejected.begin(), rejected.end(), 1));
  const double rate = static_cast<double>(n_rej) / static_cast<double>(std::max<std::size_t>(trials, 1));
  const double max_rate = get_or<double>(raw, "max_rejection_rate", 0.03);
  const double se = std::sqrt(rate * (1.0 - rate) / static_cast<double>(std::max<std::size_t>(trials, 1)));
  checks.add("trials=" + std::to_string(trials) + ":rejection_rate", rate, se, max_rate, "statistic <= threshold",
             rate <= max_rate);
  return {{"trials", trials},
          {"replicates_per_trial", cfg.replicates},
          {"measures", names},
          {"level", num(options.level)},
          {"rejections", n_rej},
          {"rejection_rate", num(rate)},
          {"std_error", num(se)}};
}

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw Error(Errc::io, "cannot open " + p.string() + " for writing");
  os << text;
  if (!os) throw Error(Errc::io, "write failed for " + p.string());
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds = {"runs",     "inradius",    "inradius_hat",    "circumradius",
                                                 "sandwich", "pk_estimate", "null_calibration"};
  return kinds;
}

ExperimentConfig ExperimentConfig::from_json(const Json& j) {
  if (!j.is_object()) config_error("config must be a JSON object");
  const int version = get_or<int>(j, "schema_version", -1);
  if (version != kSchemaVersion) {
    config_error("schema_version must be " + std::to_string(kSchemaVersion) + " (got " + std::to_string(version) + ")");
  }
  ExperimentConfig c;
  c.raw = j;
  c.experiment = get_or<std::string>(j, "experiment", "");
  const auto& kinds = experiment_kinds();
  if (std::find(kinds.begin(), kinds.end(), c.experiment) == kinds.end()) {
    config_error("experiment must be one of runs, inradius, inradius_hat, circumradius, sandwich, pk_estimate, "
                 "null_calibration (got '" + c.experiment + "')");
  }
  if (!j.contains("seed")) config_error("seed is required so runs are reproducible");
  c.seed = get_or<std::uint64_t>(j, "seed", 0);
  c.replicates = get_or<std::size_t>(j, "replicates", 1);
  if (c.replicates < 1) config_error("replicates must be >= 1");
  c.workers = get_or<int>(j, "workers", 1);
  if (c.workers < 1) config_error("workers must be >= 1");
  c.output_dir = get_or<std::string>(j, "output_dir", "out/" + c.experiment);

  if (j.contains("schedule")) {
    c.schedule = doubles(j.at("schedule"), "schedule");
  } else if (c.experiment == "pk_estimate") {
    c.schedule = {static_cast<double>(get_or<std::size_t>(j, "samples", 100000))};
  } else if (c.experiment == "null_calibration") {
    c.schedule = {static_cast<double>(get_or<std::size_t>(j, "trials", 1000))};
  }
  if (c.schedule.empty()) config_error("schedule must be a nonempty list of t (or n) values");
  for (double v : c.schedule) {
    if (!(v > 0.0) || !std::isfinite(v)) config_error("schedule values must be positive and finite");
  }

  // Kind-specific validation: build every model once so errors surface early.
  if (c.experiment == "runs") {
    parse_bernoulli(section(j, "model"));
    if (j.contains("rings")) parse_rings(j.at("rings"));
  } else if (c.experiment == "inradius" || c.experiment == "inradius_hat" || c.experiment == "circumradius") {
    const auto density = parse_density(section(j, "density"));
    if (!j.contains("window")) config_error("window is required");
    const auto window = parse_window(j.at("window"));
    if (window.dim() != density.dim()) config_error("window and density dimensions differ");
    if (!density.support().contains(window.bounding_box())) config_error("window must lie inside density.support");
    if (c.experiment == "circumradius" && density.dim() > 2) config_error("circumradius supports d in {1, 2}");
    if (!(density.f_min() > 0.0)) config_error("density must be bounded away from zero on its support");
    if (j.contains("rings")) parse_rings(j.at("rings"));
  } else if (c.experiment == "sandwich") {
    const auto phi = parse_density(section(j, "phi"));
    parse_density(section(j, "f1"));
    parse_density(section(j, "f2"));
    if (!j.contains("window")) config_error("window is required");
    const auto window = parse_window(j.at("window"));
    if (window.dim() != phi.dim()) config_error("window and density dimensions differ");
    const double s = get_or<double>(j, "s", 0.5);
    const double r = get_or<double>(j, "r", 2.0);
    if (!(s > 0.0 && s <= 1.0)) config_error("s must be in (0, 1]");
    if (!(r >= 1.0)) config_error("r must be >= 1");
  } else if (c.experiment == "pk_estimate") {
    const int d = get_or<int>(j, "d", 2);
    if (d < 1 || d > 2) config_error("pk_estimate supports d in {1, 2}");
    if (get_or<int>(j, "k", d + 1) < d + 1) config_error("k must be >= d + 1");
  } else if (c.experiment == "null_calibration") {
    if (j.contains("measures")) {
      for (const auto& n : j.at("measures").get<std::vector<std::string>>()) parse_measure(n);
    }
    if (c.replicates < 100) config_error("null_calibration needs replicates >= 100 per trial");
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(Errc::io, "cannot read config " + path.string());
  Json j;
  try {
    j = Json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    config_error(path.string() + ": " + e.what());
  }
  return from_json(j);
}

Json ExperimentConfig::describe() const {
  Json points = Json::array();
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    Json p = {{"index", i}, {"value", num(schedule[i])}, {"seed", point_seed(seed, i)}};
    if (experiment == "runs") {
      const auto model = parse_bernoulli(raw.at("model"));
      const auto n = static_cast<std::uint64_t>(schedule[i]);
      const auto rings = rings_or_default(raw, MeasureDescriptor::Kind::lebesgue_halfline);
      const double u_max = std::max(max_upper(rings), get_or<double>(raw, "arrival_horizon", 10.0));
      p["y_n"] = num(model.y(n));
      p["horizon_bits"] = model.horizon(n, u_max);
    } else if (experiment == "inradius" || experiment == "inradius_hat") {
      const auto density = parse_density(raw.at("density"));
      const auto window = parse_window(raw.at("window"));
      p["margin"] = num(inradius_margin(density, schedule[i], region_mass(density, window)));
    } else if (experiment == "circumradius") {
      const auto density = parse_density(raw.at("density"));
      p["s_t_per_alpha2"] = num(circumradius_scale(density.dim(), schedule[i], 1.0));
    }
    points.push_back(std::move(p));
  }
  return {{"schema_version", kSchemaVersion},
          {"experiment", experiment},
          {"replicates", replicates},
          {"workers", workers},
          {"output_dir", output_dir.string()},
          {"schedule", std::move(points)}};
}

// ---------------------------------------------------------------------------
// Runner

Report empty_report(const std::string& experiment) {
  Report r;
  r.json = {{"schema_version", kSchemaVersion},
            {"experiment", experiment},
            {"config", Json::object()},
            {"points", Json::array()},
            {"checks", Json::array()},
            {"pass", true},
            {"runtime_seconds", 0.0}};
  return r;
}

Report run_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  Report report = empty_report(config.experiment);
  report.json["config"] = config.raw;
  Checks checks;
  Json points = Json::array();
  Json extra = Json::object();

  std::optional<Alpha2> a2;
  if (config.experiment == "circumradius") {
    const int d = parse_density(config.raw.at("density")).dim();
    a2 = resolve_alpha2(config.raw, d, config.seed ^ 0xA2A2ULL);
    extra["alpha2"] = {{"value", num(a2->value)},
                       {"std_error", num(a2->std_error)},
                       {"exact", a2->exact},
                       {"p_hat", num(a2->p_hat)},
                       {"p_std_error", num(a2->p_se)}};
  }

  for (std::size_t i = 0; i < config.schedule.size(); ++i) {
    const auto& kind = config.experiment;
    if (kind == "runs") {
      points.push_back(run_runs_point(config, i, report, checks));
    } else if (kind == "inradius" || kind == "inradius_hat") {
      points.push_back(run_inradius_point(config, i, report, checks, kind == "inradius_hat"));
    } else if (kind == "circumradius") {
      points.push_back(run_circumradius_point(config, i, report, checks, *a2));
    } else if (kind == "sandwich") {
      points.push_back(run_sandwich_point(config, i, report, checks));
    } else if (kind == "pk_estimate") {
      points.push_back(run_pk_point(config, i, checks));
    } else if (kind == "null_calibration") {
      points.push_back(run_null_point(config, i, checks));
    }
  }
  for (auto& [k, v] : extra.items()) report.json[k] = v;
  report.json["points"] = std::move(points);
  report.pass = checks.pass();
  report.json["checks"] = checks.take();
  report.json["pass"] = report.pass;
  report.json["runtime_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

// ---------------------------------------------------------------------------
// Emission

std::string report_json_text(const Report& report) { return report.json.dump(2) + "\n"; }

std::string csv_text(std::vector<CsvRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const CsvRow& a, const CsvRow& b) {
    return std::tie(a.t, a.statistic, a.replicate) < std::tie(b.t, b.statistic, b.replicate);
  });
  std::string out = "replicate,t,statistic,value\n";
  for (const auto& r : rows) {
    out += std::to_string(r.replicate) + "," + fmt_double(r.t) + "," + r.statistic + "," + fmt_double(r.value) + "\n";
  }
  return out;
}

std::string cdf_csv_text(std::vector<CdfRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const CdfRow& a, const CdfRow& b) {
    return std::tie(a.t, a.statistic, a.u) < std::tie(b.t, b.statistic, b.u);
  });
  std::string out = "t,statistic,u,empirical,target\n";
  for (const auto& r : rows) {
    out += fmt_double(r.t) + "," + r.statistic + "," + fmt_double(r.u) + "," + fmt_double(r.empirical) + "," +
           fmt_double(r.target) + "\n";
  }
  return out;
}

void emit_report(const Report& report, const std::filesystem::path& dir, ReportFormat format) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::io, "cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / "report.json", report_json_text(report));
  if (format == ReportFormat::csv_bundle) {
    write_file(dir / "counts.csv", csv_text(report.counts));
    write_file(dir / "extremes.csv", csv_text(report.extremes));
    write_file(dir / "cdf_pairs.csv", cdf_csv_text(report.cdf));
  }
}

}  // namespace ppconv
