#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "charteval/chartgen.hpp"
#include "charteval/metrics.hpp"
#include "charteval/qa.hpp"

namespace charteval {

enum class ChartStatus { Ok, MissingPrediction, ParseFailure };

const char* to_string(ChartStatus s);

struct ChartScore {
  std::string id;
  ChartType chart_type = ChartType::Simple;
  double rnss = 0.0;
  double rms_precision = 0.0;
  double rms_recall = 0.0;
  double rms_f1 = 0.0;
  ChartStatus status = ChartStatus::Ok;
};

struct ScoreAggregate {
  std::size_t n = 0;
  double mean_rnss = 0.0;
  double mean_rms_f1 = 0.0;
  double mean_rms_precision = 0.0;
  double mean_rms_recall = 0.0;
};

struct RunReport {
  std::vector<ChartScore> rows;
  ScoreAggregate overall;
  std::array<ScoreAggregate, 3> by_type{};  // Simple / Stacked / Grouped
  std::size_t missing_predictions = 0;
  std::size_t parse_failures = 0;
};

struct EvalTableOptions {
  MetricConfig metrics;
  /// Missing predictions score as empty tables (RNSS 0, RMS F1 0);
  /// when false they are skipped and only counted.
  bool missing_as_empty = true;
  std::size_t jobs = 1;
};

struct Prediction {
  std::string id;
  std::string table_text;
};

std::vector<Prediction> load_predictions(const std::filesystem::path& jsonl_path);

/// Scores each prediction against its chart's ground truth. Throws on
/// prediction ids absent from the manifest. Strict parsing is tried
/// first, then lenient; a table that fails both scores zero and is
/// flagged.
RunReport eval_table(const std::vector<ManifestRecord>& manifest,
                     const std::vector<Prediction>& predictions, const EvalTableOptions& options);

std::string run_report_json(const RunReport& report);
std::string run_report_text(const RunReport& report);

/// One pairwise comparison between two QA reports.
struct ReportComparison {
  std::string model_1, configuration_1;
  std::string model_2, configuration_2;
  double delta_mape = 0.0;
  double delta_rmse = 0.0;
  std::optional<double> rho_mape;  // absent when the baseline MAPE is zero
};

/// Delta and rho over every ordered pair of reports.
std::vector<ReportComparison> compare_reports(const std::vector<QaReport>& reports);

std::string comparisons_json(const std::vector<QaReport>& reports,
                             const std::vector<ReportComparison>& comparisons);
std::string comparisons_text(const std::vector<ReportComparison>& comparisons);

}  // namespace charteval
