#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "charteval/chartgen.hpp"
#include "charteval/table.hpp"

namespace charteval {

class QaError : public std::runtime_error {
public:
  explicit QaError(const std::string& what) : std::runtime_error(what) {}
};

struct QaPair {
  std::string chart_id;
  std::string query;
  long long correct_answer = 0;
};

enum class EvalMode { ImageOnly, ImagePlusBaseTable, ImagePlusFineTunedTable };

const char* to_string(EvalMode mode);
EvalMode eval_mode_from_string(const std::string& s);

struct EvalConfiguration {
  EvalMode mode = EvalMode::ImageOnly;
  /// JSONL prediction bundle ({"id", "table_text"}); required for the
  /// table-bearing modes.
  std::filesystem::path table_source;
};

struct PromptBundle {
  std::string system;
  std::string user;
  std::string image_path;               // attached for every configuration
  std::optional<std::string> table_text;
};

/// Verbatim prompt text used when querying a model.
const std::string& answer_system_prompt();
const std::string& answer_task_prompt();
/// Verbatim query-generation prompts for driving an external model.
const std::string& query_generation_system_prompt();
std::string query_generation_prompt(const std::string& table_text);

/// Deterministic template-based question generation. Throws QaError
/// when the table has no usable numeric entries.
std::vector<QaPair> generate_qa_pairs(const LinearizedTable& table, const std::string& chart_id,
                                      uint64_t rng_seed, std::size_t count);

/// The individual templates, exposed so that fixed questions can be
/// built over known tables.
QaPair lookup_question(const LinearizedTable& table, const Entry& entry,
                       const std::string& chart_id);
QaPair difference_question(const Entry& a, const Entry& b, const std::string& chart_id);
QaPair row_sum_question(const LinearizedTable& table, std::size_t row_index,
                        const std::string& chart_id);

PromptBundle build_prompt(const QaPair& pair, const EvalConfiguration& cfg,
                          const std::optional<std::string>& table_text,
                          const std::string& image_path);

enum class ExtractOrder { Last, First };

/// Pulls a signed integer token out of free-form model text;
/// chain-of-thought answers end with the final value, so the last
/// token wins by default.
std::optional<long long> extract_integer(const std::string& response,
                                         ExtractOrder order = ExtractOrder::Last);

/// Mean absolute percentage error; pairs with zero truth are excluded
/// (callers count them via usable_pairs).
double mape(const std::vector<double>& truth, const std::vector<double>& pred,
            std::size_t* usable_pairs = nullptr);
double rmse(const std::vector<double>& truth, const std::vector<double>& pred);
/// rho = (mape_1 - mape_2) / mape_1 * 100
double relative_improvement(double mape_1, double mape_2);
double config_delta(double metric_c1, double metric_c2);

struct ModelRequest {
  std::string chart_id;
  PromptBundle prompt;
};

/// One request/response text exchange; implementations must tolerate
/// retried (idempotent) calls. Throws on transport failure.
class ModelClient {
public:
  virtual ~ModelClient() = default;
  virtual std::string query(const ModelRequest& request) = 0;
  virtual std::string name() const = 0;
};

/// Answers every question perfectly from the known QA pairs.
std::unique_ptr<ModelClient> make_oracle_client(const std::vector<QaPair>& pairs);
/// Answers truth * (1 + percent/100), rounded.
std::unique_ptr<ModelClient> make_perturb_client(const std::vector<QaPair>& pairs,
                                                 double percent);
/// Returns prose with no integer in it.
std::unique_ptr<ModelClient> make_refuse_client();

struct HttpClientConfig {
  std::string endpoint_url;  // e.g. http://host:port/v1/generate
  std::string model;
  std::string auth_token;            // sent as a bearer token when non-empty
  bool chat_completions = false;     // adapt to a chat-completions style API
  int timeout_seconds = 60;
  bool send_image = true;
};

std::unique_ptr<ModelClient> make_http_client(const HttpClientConfig& config);

struct QaRunRecord {
  std::string chart_id;
  std::string configuration;
  std::string model_name;
  std::string query;
  std::string raw_response;
  std::optional<long long> extracted;
  long long correct_answer = 0;
  std::string error;  // transport failure after retries, if any
};

struct QaReport {
  std::string model_name;
  std::string configuration;
  std::size_t n = 0;  // pairs with a successful extraction
  double mape_percent = 0.0;
  double rmse = 0.0;
  std::size_t extraction_failures = 0;
  std::size_t zero_truth_excluded = 0;
};

struct RunOptions {
  std::size_t jobs = 4;
  std::size_t retries = 2;
  int backoff_ms = 250;
};

struct QaRunResult {
  QaReport report;
  std::vector<QaRunRecord> records;  // in QA-file order
};

QaRunResult run_eval(const std::vector<ManifestRecord>& manifest,
                     const std::vector<QaPair>& pairs, const EvalConfiguration& cfg,
                     ModelClient& client, const std::filesystem::path& dataset_root,
                     const RunOptions& options = {});

std::vector<QaPair> load_qa_file(const std::filesystem::path& path);
void save_qa_file(const std::vector<QaPair>& pairs, const std::filesystem::path& path);

std::string qa_report_json(const QaReport& report);
QaReport qa_report_from_json(const std::string& text);
std::string qa_record_json(const QaRunRecord& record);

}  // namespace charteval
