#include "charteval/report.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace charteval {

namespace {

using ordered_json = nlohmann::ordered_json;

ScoreAggregate aggregate(const std::vector<ChartScore>& rows,
                         const std::optional<ChartType>& type) {
  ScoreAggregate agg;
  for (const auto& row : rows) {
    if (type && row.chart_type != *type) continue;
    ++agg.n;
    agg.mean_rnss += row.rnss;
    agg.mean_rms_f1 += row.rms_f1;
    agg.mean_rms_precision += row.rms_precision;
    agg.mean_rms_recall += row.rms_recall;
  }
  if (agg.n > 0) {
    const auto n = static_cast<double>(agg.n);
    agg.mean_rnss /= n;
    agg.mean_rms_f1 /= n;
    agg.mean_rms_precision /= n;
    agg.mean_rms_recall /= n;
  }
  return agg;
}

ordered_json aggregate_json(const ScoreAggregate& agg) {
  return ordered_json{{"n", agg.n},
                      {"mean_rnss", agg.mean_rnss},
                      {"mean_rms_f1", agg.mean_rms_f1},
                      {"mean_rms_precision", agg.mean_rms_precision},
                      {"mean_rms_recall", agg.mean_rms_recall}};
}

}  // namespace

const char* to_string(ChartStatus s) {
  switch (s) {
    case ChartStatus::Ok: return "ok";
    case ChartStatus::MissingPrediction: return "missing_prediction";
    case ChartStatus::ParseFailure: return "parse_failure";
  }
  return "ok";
}

std::vector<Prediction> load_predictions(const std::filesystem::path& jsonl_path) {
  std::ifstream in(jsonl_path);
  if (!in) throw std::runtime_error("cannot read predictions: " + jsonl_path.string());
  std::vector<Prediction> predictions;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    predictions.push_back(
        {j.at("id").get<std::string>(), j.at("table_text").get<std::string>()});
  }
  return predictions;
}

RunReport eval_table(const std::vector<ManifestRecord>& manifest,
                     const std::vector<Prediction>& predictions,
                     const EvalTableOptions& options) {
  std::unordered_map<std::string, const std::string*> predicted;
  for (const auto& p : predictions) predicted[p.id] = &p.table_text;
  std::unordered_map<std::string, const ManifestRecord*> by_id;
  for (const auto& rec : manifest) by_id[rec.id] = &rec;
  for (const auto& p : predictions) {
    if (!by_id.count(p.id)) throw std::runtime_error("unknown prediction id: " + p.id);
  }

  RunReport report;
  std::vector<ChartScore> rows(manifest.size());
  std::atomic<std::size_t> next{0};
  const std::size_t workers = std::max<std::size_t>(1, std::min(options.jobs, manifest.size()));

  auto score_one = [&](std::size_t i) {
    const ManifestRecord& rec = manifest[i];
    ChartScore row;
    row.id = rec.id;
    row.chart_type = rec.chart_type;

    const auto it = predicted.find(rec.id);
    if (it == predicted.end()) {
      row.status = ChartStatus::MissingPrediction;
      rows[i] = std::move(row);
      return;
    }

    const LinearizedTable target = parse_linearized(rec.ground_truth_text, ParseMode::Strict);
    LinearizedTable pred;
    bool parsed = false;
    try {
      pred = parse_linearized(*it->second, ParseMode::Strict);
      parsed = true;
    } catch (const TableError&) {
      try {
        pred = parse_linearized(*it->second, ParseMode::Lenient);
        parsed = true;
      } catch (const TableError&) {
        row.status = ChartStatus::ParseFailure;
      }
    }
    if (parsed) {
      row.rnss = rnss(to_numbers(pred), to_numbers(target)).value;
      const RmsScore s = rms(to_entries(pred), to_entries(target), options.metrics);
      row.rms_precision = s.precision;
      row.rms_recall = s.recall;
      row.rms_f1 = s.f1;
    }
    rows[i] = std::move(row);
  };

  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < manifest.size(); i = next.fetch_add(1)) {
        score_one(i);
      }
    });
  }
  for (auto& t : pool) t.join();

  for (auto& row : rows) {
    if (row.status == ChartStatus::MissingPrediction) {
      ++report.missing_predictions;
      if (!options.missing_as_empty) continue;  // skip-and-count mode
    }
    if (row.status == ChartStatus::ParseFailure) ++report.parse_failures;
    report.rows.push_back(std::move(row));
  }

  report.overall = aggregate(report.rows, std::nullopt);
  report.by_type[0] = aggregate(report.rows, ChartType::Simple);
  report.by_type[1] = aggregate(report.rows, ChartType::Stacked);
  report.by_type[2] = aggregate(report.rows, ChartType::Grouped);
  return report;
}

std::string run_report_json(const RunReport& report) {
  ordered_json rows = ordered_json::array();
  for (const auto& row : report.rows) {
    rows.push_back(ordered_json{{"id", row.id},
                                {"chart_type", to_string(row.chart_type)},
                                {"rnss", row.rnss},
                                {"rms_precision", row.rms_precision},
                                {"rms_recall", row.rms_recall},
                                {"rms_f1", row.rms_f1},
                                {"status", to_string(row.status)}});
  }
  ordered_json j = {{"rows", std::move(rows)},
                    {"aggregates",
                     {{"overall", aggregate_json(report.overall)},
                      {"simple", aggregate_json(report.by_type[0])},
                      {"stacked", aggregate_json(report.by_type[1])},
                      {"grouped", aggregate_json(report.by_type[2])}}},
                    {"missing_predictions", report.missing_predictions},
                    {"parse_failures", report.parse_failures}};
  return j.dump(2);
}

std::string run_report_text(const RunReport& report) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << "Chart Type   N      RNSS (%)   RMS F1 (%)\n";
  const std::array<std::string, 3> names = {"Simple", "Stacked", "Grouped"};
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& agg = report.by_type[i];
    out << std::left << std::setw(12) << names[i] << " " << std::setw(6) << agg.n << " "
        << std::setw(10) << agg.mean_rnss * 100.0 << " " << agg.mean_rms_f1 * 100.0 << "\n";
  }
  out << std::left << std::setw(12) << "Overall" << " " << std::setw(6) << report.overall.n << " "
      << std::setw(10) << report.overall.mean_rnss * 100.0 << " "
      << report.overall.mean_rms_f1 * 100.0 << "\n";
  if (report.missing_predictions) {
    out << "missing predictions: " << report.missing_predictions << "\n";
  }
  if (report.parse_failures) out << "parse failures: " << report.parse_failures << "\n";
  return out.str();
}

std::vector<ReportComparison> compare_reports(const std::vector<QaReport>& reports) {
  std::vector<ReportComparison> comparisons;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    for (std::size_t j = 0; j < reports.size(); ++j) {
      if (i == j) continue;
      const QaReport& a = reports[i];
      const QaReport& b = reports[j];
      ReportComparison cmp;
      cmp.model_1 = a.model_name;
      cmp.configuration_1 = a.configuration;
      cmp.model_2 = b.model_name;
      cmp.configuration_2 = b.configuration;
      cmp.delta_mape = config_delta(a.mape_percent, b.mape_percent);
      cmp.delta_rmse = config_delta(a.rmse, b.rmse);
      if (a.mape_percent != 0.0) {
        cmp.rho_mape = relative_improvement(a.mape_percent, b.mape_percent);
      }
      comparisons.push_back(std::move(cmp));
    }
  }
  return comparisons;
}

std::string comparisons_json(const std::vector<QaReport>& reports,
                             const std::vector<ReportComparison>& comparisons) {
  ordered_json inputs = ordered_json::array();
  for (const auto& r : reports) inputs.push_back(ordered_json::parse(qa_report_json(r)));
  ordered_json rows = ordered_json::array();
  for (const auto& cmp : comparisons) {
    rows.push_back(
        ordered_json{{"model_1", cmp.model_1},
                     {"configuration_1", cmp.configuration_1},
                     {"model_2", cmp.model_2},
                     {"configuration_2", cmp.configuration_2},
                     {"delta_mape", cmp.delta_mape},
                     {"delta_rmse", cmp.delta_rmse},
                     {"rho_mape", cmp.rho_mape ? ordered_json(*cmp.rho_mape) : ordered_json(nullptr)}});
  }
  ordered_json j = {{"reports", std::move(inputs)}, {"comparisons", std::move(rows)}};
  return j.dump(2);
}

std::string comparisons_text(const std::vector<ReportComparison>& comparisons) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  for (const auto& cmp : comparisons) {
    out << cmp.model_1 << "/" << cmp.configuration_1 << " vs " << cmp.model_2 << "/"
        << cmp.configuration_2 << ": dMAPE=" << cmp.delta_mape << " dRMSE=" << cmp.delta_rmse;
    if (cmp.rho_mape) out << " rho=" << *cmp.rho_mape << "%";
    out << "\n";
  }
  return out.str();
}

}  // namespace charteval
