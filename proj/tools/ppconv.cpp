// ppconv: config-driven experiment runner.
//
//   ppconv <kind> --config FILE [--seed N] [--workers N] [--out DIR] [--describe]
//
// Exit codes: 0 all checks pass, 1 statistical rejection, 2 configuration or
// runtime error.

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ppconv/common.hpp"
#include "ppconv/experiments.hpp"

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out;
  bool describe = false;
  bool json_only = false;
};

int run(const std::string& kind, const Options& o) {
  using ppconv::Json;
  Json raw;
  {
    std::ifstream is(o.config);
    if (!is) throw ppconv::Error(ppconv::Errc::io, "cannot read config " + o.config);
    try {
      raw = Json::parse(is);
    } catch (const nlohmann::json::exception& e) {
      throw ppconv::Error(ppconv::Errc::config, o.config + ": " + e.what());
    }
  }
  if (!raw.is_object()) throw ppconv::Error(ppconv::Errc::config, "config must be a JSON object");
  if (raw.contains("experiment") && raw["experiment"] != kind) {
    throw ppconv::Error(ppconv::Errc::config, "config is for experiment '" + raw["experiment"].get<std::string>() +
                                                  "' but the subcommand is '" + kind + "'");
  }
  raw["experiment"] = kind;
  if (o.seed) raw["seed"] = *o.seed;
  if (o.workers) raw["workers"] = *o.workers;
  if (!o.out.empty()) raw["output_dir"] = o.out;
  const auto config = ppconv::ExperimentConfig::from_json(raw);

  if (o.describe) {
    std::cout << config.describe().dump(2) << "\n";
    return 0;
  }
  const auto report = ppconv::run_experiment(config);
  ppconv::emit_report(report, config.output_dir,
                      o.json_only ? ppconv::ReportFormat::json : ppconv::ReportFormat::csv_bundle);

  for (const auto& c : report.json["checks"]) {
    std::cout << (c["pass"].get<bool>() ? "PASS " : "FAIL ") << c["name"].get<std::string>()
              << "  statistic=" << c["statistic"].dump() << " threshold=" << c["threshold"].dump() << "\n";
  }
  std::cout << (report.pass ? "all checks passed" : "statistical rejection") << " ("
            << report.json["runtime_seconds"].get<double>() << " s), report in " << config.output_dir.string()
            << "\n";
  return report.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Poisson process convergence lab"};
  app.require_subcommand(1);
  Options o;
  std::string chosen;
  for (const auto& kind : ppconv::experiment_kinds()) {
    auto* sub = app.add_subcommand(kind, "run the " + kind + " experiment");
    sub->add_option("--config", o.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "override the master seed");
    sub->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", o.out, "output directory");
    sub->add_flag("--describe", o.describe, "print the resolved schedule and exit");
    sub->add_flag("--json-only", o.json_only, "write report.json only");
    sub->callback([&chosen, kind] { chosen = kind; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    return run(chosen, o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return 2;
}
