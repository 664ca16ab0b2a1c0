// charteval command-line tool: dataset generation, table scoring, QA
// evaluation and report comparison over the C API.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "charteval.h"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct OwnedString {
  char* ptr = nullptr;
  ~OwnedString() { ce_string_free(ptr); }
  std::string str() const { return ptr ? std::string(ptr) : std::string(); }
};

[[noreturn]] void die(const std::string& context) {
  std::cerr << "error: " << context << ": " << ce_last_error() << "\n";
  std::exit(2);
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    std::cerr << "error: cannot write " << path << "\n";
    std::exit(2);
  }
  out << content;
}

int cmd_gen(const std::string& config_path, const std::string& out_dir, long long seed,
            std::size_t jobs, bool no_images, std::size_t qa_per_chart, long long qa_seed) {
  std::string resolved = config_path;
  if (seed >= 0) {
    // --seed overrides the config's master_seed
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "error: cannot read config " << config_path << "\n";
      return 2;
    }
    json cfg = json::parse(in);
    cfg["master_seed"] = static_cast<uint64_t>(seed);
    fs::create_directories(out_dir);
    resolved = (fs::path(out_dir) / "config.resolved.json").string();
    write_text(resolved, cfg.dump(2));
  }

  OwnedString summary;
  if (ce_generate_dataset(resolved.c_str(), out_dir.c_str(), jobs, no_images ? 0 : 1,
                          &summary.ptr) != CE_OK) {
    die("gen");
  }
  const json j = json::parse(summary.str());
  std::cout << "manifest: " << j.at("manifest").get<std::string>() << "\n"
            << "counts: simple=" << j.at("simple") << " stacked=" << j.at("stacked")
            << " grouped=" << j.at("grouped") << " total=" << j.at("total") << "\n";
  if (j.at("up_to_date").get<bool>()) std::cout << "manifest up-to-date (byte-identical)\n";

  if (qa_per_chart > 0) {
    const std::string qa_path = (fs::path(out_dir) / "qa.jsonl").string();
    const json opts = {{"per_chart", qa_per_chart},
                       {"seed", static_cast<uint64_t>(qa_seed < 0 ? 0 : qa_seed)}};
    OwnedString qa_summary;
    const std::string opts_text = opts.dump();
    if (ce_generate_qa(j.at("manifest").get<std::string>().c_str(), opts_text.c_str(),
                       qa_path.c_str(), &qa_summary.ptr) != CE_OK) {
      die("gen --qa-per-chart");
    }
    const json q = json::parse(qa_summary.str());
    std::cout << "qa pairs: " << q.at("pairs") << " -> " << qa_path << "\n";
  }
  return 0;
}

std::string render_table_report(const json& report) {
  char line[160];
  std::string out = "Chart Type   N      RNSS (%)   RMS F1 (%)\n";
  const auto& aggs = report.at("aggregates");
  for (const auto& [key, title] : std::vector<std::pair<std::string, std::string>>{
           {"simple", "Simple"}, {"stacked", "Stacked"}, {"grouped", "Grouped"},
           {"overall", "Overall"}}) {
    const auto& agg = aggs.at(key);
    std::snprintf(line, sizeof(line), "%-12s %-6zu %-10.2f %.2f\n", title.c_str(),
                  agg.at("n").get<std::size_t>(), agg.at("mean_rnss").get<double>() * 100.0,
                  agg.at("mean_rms_f1").get<double>() * 100.0);
    out += line;
  }
  return out;
}

int cmd_eval_table(const std::string& manifest, const std::string& predictions,
                   const json& options, const std::string& out_path, bool allow_partial) {
  OwnedString report;
  const std::string opts_text = options.dump();
  if (ce_eval_table(manifest.c_str(), predictions.c_str(), opts_text.c_str(), &report.ptr) !=
      CE_OK) {
    die("eval-table");
  }
  const json j = json::parse(report.str());
  if (!out_path.empty()) write_text(out_path, report.str());
  std::cout << render_table_report(j);
  const auto missing = j.at("missing_predictions").get<std::size_t>();
  const auto parse_failures = j.at("parse_failures").get<std::size_t>();
  if (missing) std::cout << "missing predictions: " << missing << "\n";
  if (parse_failures) std::cout << "parse failures: " << parse_failures << "\n";
  return (missing + parse_failures) > 0 && !allow_partial ? 1 : 0;
}

int cmd_eval_qa(const std::string& manifest, const std::string& qa_file, const json& options,
                const std::string& out_path, bool allow_partial) {
  OwnedString report;
  const std::string opts_text = options.dump();
  if (ce_eval_qa(manifest.c_str(), qa_file.c_str(), opts_text.c_str(), &report.ptr) != CE_OK) {
    die("eval-qa");
  }
  const json j = json::parse(report.str());
  if (!out_path.empty()) write_text(out_path, report.str());
  std::cout << "model: " << j.at("model").get<std::string>()
            << "  configuration: " << j.at("configuration").get<std::string>() << "\n"
            << "n=" << j.at("n");
  if (!j.at("mape_percent").is_null()) {
    char buf[80];
    std::snprintf(buf, sizeof(buf), "  MAPE=%.4f%%  RMSE=%.4f",
                  j.at("mape_percent").get<double>(), j.at("rmse").get<double>());
    std::cout << buf;
  }
  std::cout << "  extraction failures=" << j.at("extraction_failures") << "\n";
  const auto failures = j.at("extraction_failures").get<std::size_t>();
  return failures > 0 && !allow_partial ? 1 : 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& out_path) {
  std::vector<const char*> paths;
  paths.reserve(inputs.size());
  for (const auto& p : inputs) paths.push_back(p.c_str());
  OwnedString out;
  if (ce_compare_reports(paths.data(), paths.size(), &out.ptr) != CE_OK) die("report");
  const json j = json::parse(out.str());
  if (!out_path.empty()) write_text(out_path, out.str());
  for (const auto& cmp : j.at("comparisons")) {
    char buf[240];
    const std::string lhs =
        cmp.at("model_1").get<std::string>() + "/" + cmp.at("configuration_1").get<std::string>();
    const std::string rhs =
        cmp.at("model_2").get<std::string>() + "/" + cmp.at("configuration_2").get<std::string>();
    if (cmp.at("rho_mape").is_null()) {
      std::snprintf(buf, sizeof(buf), "%s vs %s: dMAPE=%.2f dRMSE=%.2f\n", lhs.c_str(),
                    rhs.c_str(), cmp.at("delta_mape").get<double>(),
                    cmp.at("delta_rmse").get<double>());
    } else {
      std::snprintf(buf, sizeof(buf), "%s vs %s: dMAPE=%.2f dRMSE=%.2f rho=%.2f%%\n", lhs.c_str(),
                    rhs.c_str(), cmp.at("delta_mape").get<double>(),
                    cmp.at("delta_rmse").get<double>(), cmp.at("rho_mape").get<double>());
    }
    std::cout << buf;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic bar-chart corpora, RNSS/RMS table scoring and chart QA evaluation"};
  app.fallthrough();
  app.require_subcommand(1);

  long long seed = -1;
  std::size_t jobs = 4;
  std::string out_path;
  app.add_option("--seed", seed, "Master seed override");
  app.add_option("--jobs", jobs, "Worker threads for rendering/scoring/requests");
  app.add_option("--out", out_path, "Output path (directory for gen, JSON file otherwise)");

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a chart corpus with ground-truth tables");
  std::string gen_config;
  bool no_images = false;
  std::size_t qa_per_chart = 0;
  long long qa_seed = -1;
  gen->add_option("--config", gen_config, "Generator config JSON")->required();
  gen->add_flag("--no-images", no_images, "Skip PNG rendering (text artifacts only)");
  gen->add_option("--qa-per-chart", qa_per_chart, "Also emit qa.jsonl with N questions per chart");
  gen->add_option("--qa-seed", qa_seed, "Seed for QA generation (defaults to 0)");

  // eval-table
  auto* evt = app.add_subcommand("eval-table", "Score predicted tables against ground truth");
  std::string evt_manifest, evt_predictions;
  double tau = 0.5, theta = 1.0;
  bool case_insensitive = false, no_transpose = false, skip_missing = false;
  bool allow_partial = false;
  evt->add_option("manifest", evt_manifest, "Dataset manifest.jsonl")->required();
  evt->add_option("predictions", evt_predictions, "Prediction bundle JSONL")->required();
  evt->add_option("--tau", tau, "Text-distance credit cutoff");
  evt->add_option("--theta", theta, "Numeric-distance credit cutoff");
  evt->add_flag("--case-insensitive", case_insensitive, "Lowercase keys before comparison");
  evt->add_flag("--no-transpose", no_transpose, "Disable transposition search");
  evt->add_flag("--skip-missing", skip_missing, "Skip charts without predictions (count only)");
  evt->add_flag("--allow-partial", allow_partial, "Exit 0 despite per-item failures");

  // eval-qa
  auto* evq = app.add_subcommand("eval-qa", "Run QA pairs through a model or mock");
  std::string evq_manifest, evq_qa, configuration = "image_only", client = "oracle";
  std::string table_source, endpoint_url, model = "default", log_path;
  double perturb_percent = 10.0;
  bool chat_completions = false;
  std::size_t retries = 2;
  int backoff_ms = 250;
  evq->add_option("manifest", evq_manifest, "Dataset manifest.jsonl")->required();
  evq->add_option("qa_file", evq_qa, "QA pairs JSONL")->required();
  evq->add_option("--configuration", configuration,
                  "image_only | image_plus_base_table | image_plus_finetuned_table");
  evq->add_option("--client", client, "oracle | perturb | refuse | http");
  evq->add_option("--perturb-percent", perturb_percent, "Perturbation for the perturb mock");
  evq->add_option("--table-source", table_source, "Prediction bundle for table configurations");
  evq->add_option("--endpoint-url", endpoint_url, "HTTP endpoint for client=http");
  evq->add_option("--model", model, "Model name sent to the endpoint");
  evq->add_flag("--chat-completions", chat_completions, "Adapt to a chat-completions API");
  evq->add_option("--retries", retries, "Retries per request");
  evq->add_option("--backoff-ms", backoff_ms, "Initial retry backoff");
  evq->add_option("--log", log_path, "Per-record JSONL log path");
  evq->add_flag("--allow-partial", allow_partial, "Exit 0 despite extraction failures");

  // report
  auto* rep = app.add_subcommand("report", "Delta/rho comparison across QA reports");
  std::vector<std::string> report_inputs;
  rep->add_option("reports", report_inputs, "Two or more QA report JSON files")
      ->required()
      ->expected(2, -1);

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) {
    const std::string out_dir = out_path.empty() ? "dataset" : out_path;
    return cmd_gen(gen_config, out_dir, seed, jobs, no_images, qa_per_chart, qa_seed);
  }
  if (evt->parsed()) {
    const json options = {{"tau", tau},
                          {"theta", theta},
                          {"case_insensitive", case_insensitive},
                          {"transposition_search", !no_transpose},
                          {"missing_as_empty", !skip_missing},
                          {"jobs", jobs}};
    return cmd_eval_table(evt_manifest, evt_predictions, options, out_path, allow_partial);
  }
  if (evq->parsed()) {
    json options = {{"configuration", configuration},
                    {"client", client},
                    {"perturb_percent", perturb_percent},
                    {"jobs", jobs},
                    {"retries", retries},
                    {"backoff_ms", backoff_ms}};
    if (!table_source.empty()) options["table_source"] = table_source;
    if (!endpoint_url.empty()) options["endpoint_url"] = endpoint_url;
    if (!model.empty()) options["model"] = model;
    if (chat_completions) options["chat_completions"] = true;
    if (!log_path.empty()) options["log_path"] = log_path;
    return cmd_eval_qa(evq_manifest, evq_qa, options, out_path, allow_partial);
  }
  return cmd_report(report_inputs, out_path);
}
