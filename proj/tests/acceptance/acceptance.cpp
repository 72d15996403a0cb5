// Acceptance run: one PASS/FAIL line per criterion. Heavy criteria run the
// shipped configs through run_experiment and keep their reports under
// PPCONV_ACCEPTANCE_OUT.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "oracles.hpp"
#include "ppconv/convergence.hpp"
#include "ppconv/experiments.hpp"
#include "ppconv/interval_ring.hpp"
#include "ppconv/point_process.hpp"
#include "ppconv/rng.hpp"
#include "ppconv/voronoi.hpp"

using namespace ppconv;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << (ok ? "" : "[fail] ") << what << "; ";
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

const Report& run_config(const std::string& name) {
  static std::map<std::string, Report> cache;
  if (const auto it = cache.find(name); it != cache.end()) return it->second;
  auto cfg = ExperimentConfig::load(fs::path(PPCONV_CONFIG_DIR) / (name + ".json"));
  cfg.workers = workers();
  const auto t0 = std::chrono::steady_clock::now();
  auto report = run_experiment(cfg);
  emit_report(report, fs::path(PPCONV_ACCEPTANCE_OUT) / name);
  std::cerr << "  ran " << name << " in " << seconds_since(t0) << " s\n";
  return cache.emplace(name, std::move(report)).first->second;
}

// Every check whose name contains `key` passed, and there was at least one.
bool checks_pass(const Report& r, const std::string& key, std::ostringstream& detail) {
  int seen = 0;
  bool ok = true;
  for (const auto& c : r.json["checks"]) {
    const auto name = c["name"].get<std::string>();
    if (name.find(key) == std::string::npos) continue;
    ++seen;
    ok = ok && c["pass"].get<bool>();
    detail << name << "=" << c["statistic"].dump() << (c["pass"].get<bool>() ? "" : "(FAIL)") << " ";
  }
  return seen > 0 && ok;
}

// ---------------------------------------------------------------------------

void criterion1(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  Philox4x32 rng(101, 0);
  std::poisson_distribution<std::size_t> pois(2.0);
  std::vector<std::size_t> counts(100000);
  for (auto& c : counts) c = pois(rng);
  const auto law = EmpiricalLaw::from_counts(counts, 2.0);
  double worst = 0.0;
  for (int k = 1; k <= 6; ++k) {
    const auto d = consecutive_ratio_statistic(law, k);
    worst = std::max(worst, std::abs(d.value) / d.std_error);
  }
  o.require(worst <= 4.0, "Poisson(2) max |D_k|/se = " + std::to_string(worst));

  const auto measure = MeasureDescriptor::lebesgue_halfline();
  std::vector<RescaledSample> doubled;
  for (std::size_t r = 0; r < 2000; ++r) {
    const auto s = sample_target_process(measure, 0.0, 3.0, 102, r);
    auto atoms = s.atoms;
    atoms.insert(atoms.end(), s.atoms.begin(), s.atoms.end());
    doubled.emplace_back(std::move(atoms), RescaledSample::Meta{});
  }
  double rejected = 0.0;
  for (const auto& ring : {IntervalRing::single(0.0, 1.0), IntervalRing::single(1.0, 2.5)}) {
    const auto dl = count_distribution(doubled, ring, TargetLaw::poisson(measure));
    for (int k = 1; k <= 6; ++k) {
      const auto d = consecutive_ratio_statistic(dl, k);
      if (d.std_error > 0.0) rejected = std::max(rejected, std::abs(d.value) / d.std_error);
    }
  }
  o.require(rejected > 4.0, "duplicated atoms max |D_k|/se = " + std::to_string(rejected));
  const double secs = seconds_since(t0);
  o.require(secs < 10.0, "runtime " + std::to_string(secs) + " s");
}

void criterion2(Outcome& o) {
  const auto f = DensityModel::constant(2, 1.0, Box::cube(2, 0.0, 1.0));
  const std::size_t reps = 20000;
  std::size_t empty = 0;
  for (std::size_t r = 0; r < reps; ++r) empty += sample_poisson(f, 1.0, Box::cube(2, 0.0, 1.0), 201, r).empty();
  const double p = static_cast<double>(empty) / reps;
  const double e = std::exp(-1.0);
  const double se = std::sqrt(e * (1 - e) / reps);
  o.require(std::abs(p - e) <= 3 * se, "void probability " + std::to_string(p) + " vs e^-1 (se " + std::to_string(se) + ")");
  const auto& r = run_config("inradius_d2");
  std::ostringstream d;
  const bool ok = checks_pass(r, "tail_mean_u=", d);
  o.require(ok, d.str());
}

void criterion3(Outcome& o) {
  const auto est = estimate_p_k(1, 2, 100000, 301);
  o.require(std::abs(est.value - 0.5) <= 0.01, "p_2 = " + std::to_string(est.value));
  o.require(alpha2(1, 0.5) == 1.0, "alpha2(1, 0.5) == 1");
}

void criterion4(Outcome& o) {
  {
    const auto& r = run_config("inradius_d2");
    std::ostringstream d;
    const bool ok = checks_pass(r, "ks_max_gumbel", d);
    o.require(ok, "constant: " + d.str());
  }
  {
    const auto& r = run_config("inradius_hat_constant");
    std::ostringstream d;
    const bool ok = checks_pass(r, "variants_identical", d);
    o.require(ok, "hat vs two_c: " + d.str());
  }
  {
    const auto& r = run_config("inradius_hat_linear");
    std::ostringstream d;
    const bool ok = checks_pass(r, "ks_max_gumbel", d);
    o.require(ok, "linear hat: " + d.str());
  }
}

void criterion5(Outcome& o) {
  for (const char* name : {"circumradius_d1", "circumradius_d2"}) {
    const auto& r = run_config(name);
    std::ostringstream d;
    const bool ok = checks_pass(r, "ks_min_weibull", d);
    d << "tolerance=" << r.json["points"][0]["ks_min"]["tolerance"].dump();
    o.require(ok, std::string(name) + ": " + d.str());
  }
}

void criterion6(Outcome& o) {
  for (const char* name : {"runs_iid", "runs_block"}) {
    const auto& r = run_config(name);
    std::ostringstream d;
    for (const auto& c : r.json["checks"]) {
      d << c["name"].get<std::string>() << "=" << c["statistic"].dump() << (c["pass"].get<bool>() ? " " : "(FAIL) ");
    }
    o.require(r.pass, std::string(name) + ": " + d.str());
  }
}

void criterion7(Outcome& o) {
  std::mt19937_64 gen(701);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::array<double, 2> x{0.0, 0.0};
  auto make = [](const std::vector<oracle::P2>& pts) {
    PointConfig c(2, GeneratorMeta{});
    for (const auto& p : pts) c.push_back(p);
    return c;
  };

  int cells = 0;
  double worst_C = 0.0;
  double worst_c = 0.0;
  while (cells < 1000) {
    std::vector<oracle::P2> pts(static_cast<std::size_t>(4 + cells % 30));
    for (auto& p : pts) p = {u(gen), u(gen)};
    if (!oracle::in_hull_interior({0.0, 0.0}, pts)) continue;
    const auto cfg = make(pts);
    const auto poly = oracle::clipped_cell(pts, 1e4);
    worst_C = std::max(worst_C, std::abs(circumradius(x, cfg) - oracle::max_vertex_distance(poly)));
    worst_c = std::max(worst_c, std::abs(inradius(x, cfg) - oracle::inner_radius(poly)));
    ++cells;
  }
  o.require(worst_C <= 1e-9, "C vs clipping max error " + std::to_string(worst_C));
  o.require(worst_c <= 1e-9, "c vs clipping max error " + std::to_string(worst_c));

  int mismatches = 0;
  int part_b_cases = 0;
  int part_b_failures = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<oracle::P2> pts(static_cast<std::size_t>(1 + trial % 8));
    for (auto& p : pts) p = {u(gen), u(gen)};
    mismatches += is_cell_bounded(x, make(pts)) != oracle::in_hull_interior({0.0, 0.0}, pts);
    // d + 2 = 4 points: a bounded cell forces the other three to be unbounded
    std::vector<oracle::P2> four(4);
    for (auto& p : four) p = {u(gen), u(gen)};
    for (std::size_t i = 0; i < 4; ++i) {
      std::vector<oracle::P2> others;
      for (std::size_t j = 0; j < 4; ++j) {
        if (j != i) others.push_back({four[j][0] - four[i][0], four[j][1] - four[i][1]});
      }
      if (!is_cell_bounded(x, make(others))) continue;
      ++part_b_cases;
      for (std::size_t j = 0; j < 4; ++j) {
        if (j == i) continue;
        std::vector<oracle::P2> rest;
        for (std::size_t l = 0; l < 4; ++l) {
          if (l != j) rest.push_back({four[l][0] - four[j][0], four[l][1] - four[j][1]});
        }
        part_b_failures += is_cell_bounded(x, make(rest));
      }
    }
  }
  o.require(mismatches == 0, "boundedness mismatches " + std::to_string(mismatches) + " / 10000");
  o.require(part_b_cases > 0 && part_b_failures == 0,
            "part b: " + std::to_string(part_b_cases) + " bounded centers, " + std::to_string(part_b_failures) +
                " bounded neighbors");
}

void criterion8(Outcome& o) {
  const auto& r = run_config("sandwich_step_d1");
  std::ostringstream d;
  const bool bounds = checks_pass(r, "sandwich_", d);
  const bool nested = checks_pass(r, "coupling_order_violations", d);
  o.require(bounds && nested, d.str());
}

void criterion9(Outcome& o) {
  const auto& r = run_config("null_calibration");
  std::ostringstream d;
  const bool ok = checks_pass(r, "rejection_rate", d);
  o.require(ok, d.str());
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"1 characterization identity D_k", criterion1},
      {"2 void probability and inradius intensity", criterion2},
      {"3 d=1 constants p_2 and alpha2", criterion3},
      {"4 Gumbel limit of the max inradius", criterion4},
      {"5 Weibull limit of the min circumradius", criterion5},
      {"6 k-head runs", criterion6},
      {"7 geometry oracle equivalence", criterion7},
      {"8 sandwich bounds", criterion8},
      {"9 null calibration", criterion9},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << name << " (" << seconds_since(t0) << " s): "
              << o.detail.str() << std::endl;
    failed += o.pass ? 0 : 1;
  }
  std::cout << (9 - failed) << "/9 criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
