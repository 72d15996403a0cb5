#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace ppconv {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Parsed and validated experiment configuration. The raw JSON is kept so
/// kind-specific sections can be read by the runners and echoed in reports.
struct ExperimentConfig {
  std::string experiment;  ///< runs, inradius, inradius_hat, circumradius, sandwich, pk_estimate, null_calibration
  std::uint64_t seed = 0;
  std::size_t replicates = 1;
  int workers = 1;
  std::vector<double> schedule;  ///< t or n values
  std::filesystem::path output_dir;
  Json raw;

  /// Validates the common fields and the kind-specific section; throws
  /// Error(Errc::config) with an actionable message.
  static ExperimentConfig from_json(const Json& j);
  static ExperimentConfig load(const std::filesystem::path& path);

  /// Resolved schedule and derived quantities, without running anything.
  Json describe() const;
};

const std::vector<std::string>& experiment_kinds();

struct CsvRow {
  std::size_t replicate;
  double t;
  std::string statistic;
  double value;
};

struct CdfRow {
  double t;
  std::string statistic;
  double u;
  double empirical;
  double target;
};

struct Report {
  Json json;  ///< config echo, per-point summaries, checks, verdict
  std::vector<CsvRow> counts;
  std::vector<CsvRow> extremes;
  std::vector<CdfRow> cdf;
  bool pass = true;
};

/// Runs every schedule point; replicate r of point i always uses the same
/// random streams, so output does not depend on the worker count.
Report run_experiment(const ExperimentConfig& config);

enum class ReportFormat { json, csv_bundle };

/// json: report.json. csv_bundle: report.json plus counts.csv, extremes.csv
/// and cdf_pairs.csv, rows sorted canonically.
void emit_report(const Report& report, const std::filesystem::path& dir, ReportFormat format = ReportFormat::csv_bundle);

/// Serialized forms used by emit_report.
std::string report_json_text(const Report& report);
std::string csv_text(std::vector<CsvRow> rows);
std::string cdf_csv_text(std::vector<CdfRow> rows);

/// A report with no schedule points.
Report empty_report(const std::string& experiment);

}  // namespace ppconv
