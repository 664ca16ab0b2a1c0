#include "charteval.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "charteval/chartgen.hpp"
#include "charteval/metrics.hpp"
#include "charteval/qa.hpp"
#include "charteval/report.hpp"
#include "charteval/table.hpp"
#include "rng.hpp"

using namespace charteval;

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

ce_status fail(ce_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

ce_status ok() {
  g_last_error.clear();
  return CE_OK;
}

ce_status classify(const std::exception& e) {
  if (dynamic_cast<const TableError*>(&e)) return fail(CE_ERR_PARSE, e.what());
  if (dynamic_cast<const InvalidConfig*>(&e)) return fail(CE_ERR_INVALID_ARGUMENT, e.what());
  if (const auto* qa = dynamic_cast<const QaError*>(&e)) {
    const std::string what = qa->what();
    if (what.find("endpoint") != std::string::npos) return fail(CE_ERR_ENDPOINT, what);
    return fail(CE_ERR_INVALID_ARGUMENT, what);
  }
  const std::string what = e.what();
  if (what.find("cannot read") != std::string::npos ||
      what.find("cannot write") != std::string::npos ||
      what.find("cannot open") != std::string::npos ||
      what.find("write failed") != std::string::npos) {
    return fail(CE_ERR_IO, what);
  }
  return fail(CE_ERR_INTERNAL, what);
}

const LinearizedTable& unwrap(const ce_table* table) {
  return *reinterpret_cast<const LinearizedTable*>(table);
}

MetricConfig to_config(const ce_metric_config* config) {
  MetricConfig cfg;
  if (config) {
    cfg.tau = config->tau;
    cfg.theta = config->theta;
    cfg.case_insensitive = config->case_insensitive != 0;
    cfg.transposition_search = config->transposition_search != 0;
  }
  return cfg;
}

nlohmann::json parse_options(const char* options_json) {
  if (!options_json || !*options_json) return nlohmann::json::object();
  return nlohmann::json::parse(options_json);
}

}  // namespace

extern "C" {

const char* ce_last_error(void) { return g_last_error.c_str(); }

void ce_string_free(char* s) { std::free(s); }

ce_status ce_table_parse(const char* text, ce_parse_mode mode, ce_table** out) {
  if (!text || !out) return fail(CE_ERR_INVALID_ARGUMENT, "null argument");
  try {
    auto table = std::make_unique<LinearizedTable>(parse_linearized(
        text, mode == CE_PARSE_LENIENT ? ParseMode::Lenient : ParseMode::Strict));
    *out = reinterpret_cast<ce_table*>(table.release());
    return ok();
  } catch (const std::exception& e) {
    return classify(e);
  }
}

char* ce_table_serialize(const ce_table* table) {
  if (!table) return nullptr;
  return dup_string(serialize(unwrap(table)));
}

void ce_table_free(ce_table* table) {
  delete reinterpret_cast<LinearizedTable*>(table);
}

size_t ce_table_entry_count(const ce_table* table) {
  return table ? unwrap(table).data_cell_count() : 0;
}

ce_status ce_table_transpose(const ce_table* table, ce_table** out) {
  if (!table || !out) return fail(CE_ERR_INVALID_ARGUMENT, "null argument");
  try {
    auto transposed = std::make_unique<LinearizedTable>(transpose(unwrap(table)));
    *out = reinterpret_cast<ce_table*>(transposed.release());
    return ok();
  } catch (const std::exception& e) {
    return classify(e);
  }
}

ce_metric_config ce_metric_config_default(void) {
  const MetricConfig cfg;
  return ce_metric_config{cfg.tau, cfg.theta, cfg.case_insensitive ? 1 : 0,
                          cfg.transposition_search ? 1 : 0};
}

ce_status ce_rnss(const ce_table* pred, const ce_table* target, double* out) {
  if (!pred || !target || !out) return fail(CE_ERR_INVALID_ARGUMENT, "null argument");
  try {
    *out = rnss(to_numbers(unwrap(pred)), to_numbers(unwrap(target))).value;
    return ok();
  } catch (const std::exception& e) {
    return classify(e);
  }
}

ce_status ce_rms(const ce_table* pred, const ce_table* target, const ce_metric_config* config,
                 ce_rms_result* out) {
  if (!pred || !target || !out) return fail(CE_ERR_INVALID_ARGUMENT, "null argument");
  try {
    const RmsScore score = rms(to_entries(unwrap(pred)), to_entries(unwrap(target)),
                               to_config(config));
    *out = ce_rms_result{score.precision, score.recall, score.f1,
                         score.transposed_used ? 1 : 0};
    return ok();
  } catch (const std::exception& e) {
    return classify(e);
  }
}

ce_status ce_mape(const double* truth, const double* pred, size_t n, double* out) {
  if (!truth || !pred || !out) return fail(CE_ERR_INVALID_ARGUMENT, "null argument");
  try {
    *out = mape(std::vector<double>(truth, truth + n), std::vector<double>(pred, pred + n));
    return ok();
  } catch (const std::exception& e) {
    return classify(e);
  }
}

ce_status ce_rmse(const double* truth, const double* pred, size_t n, double* out) {
  if (!truth || !pred || !out) return fail(CE_ERR_INVALID_ARGUMENT, "null argument");
  try {
    *out = rmse(std::vector<double>(truth, truth + n), std::vector<double>(pred, pred + n));
    return ok();
  } catch (const std::exception& e) {
    return classify(e);
  }
}

ce_status ce_relative_improvement(double mape_1, double mape_2, double* out) {
  if (!out) return fail(CE_ERR_INVALID_ARGUMENT, "null argument");
  try {
    *out = relative_improvement(mape_1, mape_2);
    return ok();
  } catch (const std::exception& e) {
    return classify(e);
  }
}

double ce_config_delta(double metric_c1, double metric_c2) {
  return config_delta(metric_c1, metric_c2);
}

ce_status ce_generate_dataset(const char* config_json_path, const char* out_dir, size_t jobs,
                              int render_images, char** out_summary_json) {
  if (!config_json_path || !out_dir) return fail(CE_ERR_INVALID_ARGUMENT, "null argument");
  try {
    const GeneratorConfig config = load_generator_config(config_json_path);
    const DatasetSummary summary =
        generate_dataset(config, out_dir, jobs == 0 ? 1 : jobs, render_images != 0);
    if (out_summary_json) {
      nlohmann::ordered_json j = {{"manifest", summary.manifest_path.generic_string()},
                                  {"total", summary.total},
                                  {"simple", summary.counts_by_type[0]},
                                  {"stacked", summary.counts_by_type[1]},
                                  {"grouped", summary.counts_by_type[2]},
                                  {"up_to_date", summary.up_to_date}};
      *out_summary_json = dup_string(j.dump());
    }
    return ok();
  } catch (const std::exception& e) {
    return classify(e);
  }
}

ce_status ce_eval_table(const char* manifest_path, const char* predictions_path,
                        const char* options_json, char** out_report_json) {
  if (!manifest_path || !predictions_path || !out_report_json) {
    return fail(CE_ERR_INVALID_ARGUMENT, "null argument");
  }
  try {
    const auto opts = parse_options(options_json);
    EvalTableOptions options;
    options.metrics.tau = opts.value("tau", options.metrics.tau);
    options.metrics.theta = opts.value("theta", options.metrics.theta);
    options.metrics.case_insensitive =
        opts.value("case_insensitive", options.metrics.case_insensitive);
    options.metrics.transposition_search =
        opts.value("transposition_search", options.metrics.transposition_search);
    options.missing_as_empty = opts.value("missing_as_empty", options.missing_as_empty);
    options.jobs = opts.value("jobs", options.jobs);

    const auto manifest = load_manifest(manifest_path);
    const auto predictions = load_predictions(predictions_path);
    const RunReport report = eval_table(manifest, predictions, options);
    *out_report_json = dup_string(run_report_json(report));
    return ok();
  } catch (const std::exception& e) {
    return classify(e);
  }
}

ce_status ce_generate_qa(const char* manifest_path, const char* options_json,
                         const char* out_qa_path, char** out_summary_json) {
  if (!manifest_path || !out_qa_path) return fail(CE_ERR_INVALID_ARGUMENT, "null argument");
  try {
    const auto opts = parse_options(options_json);
    const std::size_t per_chart = opts.value("per_chart", std::size_t{1});
    const uint64_t seed = opts.value("seed", uint64_t{0});

    std::vector<QaPair> pairs;
    const auto manifest = load_manifest(manifest_path);
    for (std::size_t i = 0; i < manifest.size(); ++i) {
      const LinearizedTable table =
          parse_linearized(manifest[i].ground_truth_text, ParseMode::Strict);
      const uint64_t chart_seed = detail::splitmix64(seed) ^ detail::splitmix64(i + 1);
      for (auto& pair : generate_qa_pairs(table, manifest[i].id, chart_seed, per_chart)) {
        pairs.push_back(std::move(pair));
      }
    }
    save_qa_file(pairs, out_qa_path);
    if (out_summary_json) {
      nlohmann::ordered_json j = {{"qa_path", out_qa_path}, {"pairs", pairs.size()}};
      *out_summary_json = dup_string(j.dump());
    }
    return ok();
  } catch (const std::exception& e) {
    return classify(e);
  }
}

ce_status ce_eval_qa(const char* manifest_path, const char* qa_path, const char* options_json,
                     char** out_report_json) {
  if (!manifest_path || !qa_path || !out_report_json) {
    return fail(CE_ERR_INVALID_ARGUMENT, "null argument");
  }
  try {
    const auto opts = parse_options(options_json);
    const auto manifest = load_manifest(manifest_path);
    const auto pairs = load_qa_file(qa_path);

    EvalConfiguration cfg;
    cfg.mode = eval_mode_from_string(opts.value("configuration", std::string("image_only")));
    if (opts.contains("table_source")) {
      cfg.table_source = opts.at("table_source").get<std::string>();
    }

    const std::string client_kind = opts.value("client", std::string("oracle"));
    std::unique_ptr<ModelClient> client;
    if (client_kind == "oracle") {
      client = make_oracle_client(pairs);
    } else if (client_kind == "perturb") {
      client = make_perturb_client(pairs, opts.value("perturb_percent", 10.0));
    } else if (client_kind == "refuse") {
      client = make_refuse_client();
    } else if (client_kind == "http") {
      HttpClientConfig http;
      http.endpoint_url = opts.at("endpoint_url").get<std::string>();
      http.model = opts.value("model", std::string("default"));
      http.chat_completions = opts.value("chat_completions", false);
      http.timeout_seconds = opts.value("timeout_seconds", 60);
      http.send_image = opts.value("send_image", true);
      const std::string token_env = opts.value("auth_token_env", std::string("CHARTEVAL_API_TOKEN"));
      if (const char* token = std::getenv(token_env.c_str())) http.auth_token = token;
      client = make_http_client(http);
    } else {
      return fail(CE_ERR_INVALID_ARGUMENT, "unknown client kind: " + client_kind);
    }

    RunOptions run;
    run.jobs = opts.value("jobs", run.jobs);
    run.retries = opts.value("retries", run.retries);
    run.backoff_ms = opts.value("backoff_ms", run.backoff_ms);

    const std::filesystem::path dataset_root =
        std::filesystem::path(manifest_path).parent_path();
    const QaRunResult result = run_eval(manifest, pairs, cfg, *client, dataset_root, run);

    if (opts.contains("log_path")) {
      std::ofstream log(opts.at("log_path").get<std::string>(),
                        std::ios::binary | std::ios::trunc);
      for (const auto& record : result.records) log << qa_record_json(record) << "\n";
    }
    *out_report_json = dup_string(qa_report_json(result.report));
    return ok();
  } catch (const std::exception& e) {
    return classify(e);
  }
}

ce_status ce_compare_reports(const char* const* report_paths, size_t n_reports, char** out_json) {
  if (!report_paths || !out_json) return fail(CE_ERR_INVALID_ARGUMENT, "null argument");
  if (n_reports < 2) return fail(CE_ERR_INVALID_ARGUMENT, "need at least two reports");
  try {
    std::vector<QaReport> reports;
    for (size_t i = 0; i < n_reports; ++i) {
      std::ifstream in(report_paths[i]);
      if (!in) {
        return fail(CE_ERR_IO, std::string("cannot read report: ") + report_paths[i]);
      }
      std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      reports.push_back(qa_report_from_json(text));
    }
    *out_json = dup_string(comparisons_json(reports, compare_reports(reports)));
    return ok();
  } catch (const std::exception& e) {
    return classify(e);
  }
}

}  // extern "C"
