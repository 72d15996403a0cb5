#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "ppconv/common.hpp"
#include "ppconv/experiments.hpp"

using namespace ppconv;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("ppconv_test_" + std::to_string(::getpid())) / name;
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Json small_runs() {
  return Json::parse(R"({
    "schema_version": 1, "experiment": "runs", "seed": 5, "replicates": 300, "schedule": [1000, 5000],
    "model": {"kind": "iid", "scale": 1.0, "exponent": 0.25, "k": 2}, "condition_reps": 2000
  })");
}

Json small_inradius() {
  return Json::parse(R"({
    "schema_version": 1, "experiment": "inradius", "seed": 9, "replicates": 120, "schedule": [300],
    "density": {"kind": "constant", "value": 1.0, "support": {"lo": [-1, -1], "hi": [2, 2]}},
    "window": {"lo": [0, 0], "hi": [1, 1]}
  })");
}

Errc config_code(const Json& j) {
  try {
    ExperimentConfig::from_json(j);
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::io;  // sentinel: no error
}

int run_tool(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(PPCONV_TOOL_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_json(const fs::path& p, const Json& j) { std::ofstream(p) << j.dump(2); }

Json without_runtime(Json j) {
  j.erase("runtime_seconds");
  return j;
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_NOTHROW(ExperimentConfig::from_json(small_runs()));
  auto j = small_runs();
  j.erase("seed");
  CHECK(config_code(j) == Errc::config);
  j = small_runs();
  j["schema_version"] = 2;
  CHECK(config_code(j) == Errc::config);
  j = small_runs();
  j["experiment"] = "nope";
  CHECK(config_code(j) == Errc::config);
  j = small_runs();
  j["workers"] = 0;
  CHECK(config_code(j) == Errc::config);
  j = small_runs();
  j["schedule"] = Json::array();
  CHECK(config_code(j) == Errc::config);
  j = small_runs();
  j["model"]["kind"] = "markov";
  CHECK(config_code(j) == Errc::config);
  j = small_runs();
  j["rings"] = Json::parse("[[[1, 0]]]");
  CHECK(config_code(j) == Errc::config);
  j = small_inradius();
  j["window"] = Json::parse(R"({"lo": [0, 0], "hi": [3, 1]})");
  CHECK(config_code(j) == Errc::config);
  j = small_inradius();
  j["density"]["value"] = 0.0;
  CHECK(config_code(j) == Errc::config);
  j = Json::parse(R"({"schema_version": 1, "experiment": "null_calibration", "seed": 1, "replicates": 10})");
  CHECK(config_code(j) == Errc::config);
  CHECK(config_code(Json::array()) == Errc::config);
}

TEST_CASE("shipped configs load and describe") {
  int n = 0;
  for (const auto& entry : fs::directory_iterator(PPCONV_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    CAPTURE(entry.path().string());
    const auto cfg = ExperimentConfig::load(entry.path());
    const auto d = cfg.describe();
    CHECK(d["experiment"] == cfg.experiment);
    CHECK(d["schedule"].size() == cfg.schedule.size());
    ++n;
  }
  CHECK(n >= 7);
}

TEST_CASE("describe resolves runs quantities") {
  const auto d = ExperimentConfig::from_json(small_runs()).describe();
  REQUIRE(d["schedule"].size() == 2);
  CHECK(d["schedule"][0]["y_n"].get<double>() == doctest::Approx(std::pow(1000.0, -0.5)));
  CHECK(d["schedule"][0]["seed"] != d["schedule"][1]["seed"]);
}

TEST_CASE("output does not depend on the worker count") {
  for (const auto& base : {small_runs(), small_inradius()}) {
    auto one = base;
    one["workers"] = 1;
    auto three = base;
    three["workers"] = 3;
    const auto a = run_experiment(ExperimentConfig::from_json(one));
    const auto b = run_experiment(ExperimentConfig::from_json(three));
    CHECK(csv_text(a.counts) == csv_text(b.counts));
    CHECK(csv_text(a.extremes) == csv_text(b.extremes));
    CHECK(cdf_csv_text(a.cdf) == cdf_csv_text(b.cdf));
    auto ja = without_runtime(a.json);
    auto jb = without_runtime(b.json);
    ja["config"].erase("workers");
    jb["config"].erase("workers");
    CHECK(ja.dump() == jb.dump());
  }
}

TEST_CASE("reports: replay, round trip, emission") {
  const auto cfg = ExperimentConfig::from_json(small_inradius());
  const auto a = run_experiment(cfg);
  const auto b = run_experiment(cfg);
  CHECK(csv_text(a.counts) == csv_text(b.counts));
  CHECK(without_runtime(a.json).dump() == without_runtime(b.json).dump());

  const auto text = report_json_text(a);
  CHECK(Json::parse(text).dump(2) + "\n" == text);
  REQUIRE(a.json.contains("checks"));
  bool has_ks = false;
  for (const auto& c : a.json["checks"]) {
    has_ks = has_ks || c["name"].get<std::string>().find("ks_max_gumbel") != std::string::npos;
    CHECK(c.contains("statistic"));
    CHECK(c.contains("threshold"));
    CHECK(c.contains("rule"));
  }
  CHECK(has_ks);
  CHECK(a.json["points"][0]["tail_means"].size() == 3);

  const auto dir = scratch("emit");
  emit_report(a, dir / "one");
  emit_report(a, dir / "two");
  for (const char* f : {"report.json", "counts.csv", "extremes.csv", "cdf_pairs.csv"}) {
    CHECK(fs::exists(dir / "one" / f));
    CHECK(slurp(dir / "one" / f) == slurp(dir / "two" / f));
  }
  emit_report(a, dir / "json", ReportFormat::json);
  CHECK(fs::exists(dir / "json" / "report.json"));
  CHECK_FALSE(fs::exists(dir / "json" / "counts.csv"));
}

TEST_CASE("empty report") {
  const auto r = empty_report("runs");
  CHECK(r.pass);
  const auto parsed = Json::parse(report_json_text(r));
  CHECK(parsed["points"].empty());
  CHECK(parsed["checks"].empty());
  CHECK(csv_text({}) == "replicate,t,statistic,value\n");
}

TEST_CASE("csv rows are canonical and keep infinities readable") {
  const std::vector<CsvRow> rows = {{1, 10.0, "max", std::numeric_limits<double>::infinity()},
                                    {0, 10.0, "max", 0.1}};
  CHECK(csv_text(rows) == "replicate,t,statistic,value\n0,10,max,0.10000000000000001\n1,10,max,inf\n");
}

TEST_CASE("command-line tool exit codes") {
  const auto dir = scratch("cli");
  const Json pass = Json::parse(R"({"schema_version": 1, "experiment": "pk_estimate", "seed": 3, "d": 1, "k": 2,
                                    "samples": 20000, "expected": {"value": 0.5, "tolerance": 0.02}})");
  auto reject = pass;
  reject["expected"]["value"] = 0.9;
  write_json(dir / "pass.json", pass);
  write_json(dir / "reject.json", reject);
  std::ofstream(dir / "broken.json") << "{ not json";

  const auto out = dir / "out";
  CHECK(run_tool("pk_estimate --config " + (dir / "pass.json").string() + " --out " + out.string(), dir / "log1") == 0);
  CHECK(fs::exists(out / "report.json"));
  CHECK(run_tool("pk_estimate --config " + (dir / "reject.json").string() + " --out " + out.string(), dir / "log2") ==
        1);
  CHECK(run_tool("pk_estimate --config " + (dir / "broken.json").string(), dir / "log3") == 2);
  CHECK(run_tool("runs --config " + (dir / "pass.json").string(), dir / "log4") == 2);
  CHECK(slurp(dir / "log4").find("subcommand") != std::string::npos);
  CHECK(run_tool("pk_estimate --config " + (dir / "missing.json").string(), dir / "log5") == 2);
  CHECK(run_tool("pk_estimate --describe --config " + (dir / "pass.json").string(), dir / "log6") == 0);
  CHECK(Json::parse(slurp(dir / "log6"))["experiment"] == "pk_estimate");
  fs::remove_all(dir.parent_path());
}
