#include "charteval/qa.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <regex>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "charteval/metrics.hpp"
#include "rng.hpp"

namespace charteval {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string pair_key(const std::string& chart_id, const std::string& query) {
  return chart_id + "\x1f" + query;
}

long long rounded(double v) { return std::llround(v); }

class OracleClient : public ModelClient {
public:
  OracleClient(const std::vector<QaPair>& pairs, double percent, std::string name)
      : percent_(percent), name_(std::move(name)) {
    for (const auto& p : pairs) answers_[pair_key(p.chart_id, p.query)] = p.correct_answer;
  }

  std::string query(const ModelRequest& request) override {
    // the mock keys on (chart_id, question text) pulled from the prompt
    const std::string& user = request.prompt.user;
    const std::string marker = "\nQuery: ";
    const auto start = user.find(marker);
    if (start != std::string::npos) {
      const auto q_begin = start + marker.size();
      const auto q_end = user.find('\n', q_begin);
      const std::string question = user.substr(q_begin, q_end - q_begin);
      const auto it = answers_.find(pair_key(request.chart_id, question));
      if (it != answers_.end()) {
        const double value = static_cast<double>(it->second) * (1.0 + percent_ / 100.0);
        return "The answer is " + std::to_string(rounded(value)) + ".";
      }
    }
    return "I could not find this question in the answer key.";
  }

  std::string name() const override { return name_; }

private:
  std::unordered_map<std::string, long long> answers_;
  double percent_;
  std::string name_;
};

class RefuseClient : public ModelClient {
public:
  std::string query(const ModelRequest&) override {
    return "I cannot tell from the chart alone.";
  }
  std::string name() const override { return "mock-refuse"; }
};

std::string base64_encode(const std::string& bytes) {
  static const char* alphabet =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  while (i + 2 < bytes.size()) {
    const uint32_t n = (static_cast<unsigned char>(bytes[i]) << 16) |
                       (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                       static_cast<unsigned char>(bytes[i + 2]);
    out.push_back(alphabet[(n >> 18) & 63]);
    out.push_back(alphabet[(n >> 12) & 63]);
    out.push_back(alphabet[(n >> 6) & 63]);
    out.push_back(alphabet[n & 63]);
    i += 3;
  }
  if (i + 1 == bytes.size()) {
    const uint32_t n = static_cast<unsigned char>(bytes[i]) << 16;
    out.push_back(alphabet[(n >> 18) & 63]);
    out.push_back(alphabet[(n >> 12) & 63]);
    out += "==";
  } else if (i + 2 == bytes.size()) {
    const uint32_t n = (static_cast<unsigned char>(bytes[i]) << 16) |
                       (static_cast<unsigned char>(bytes[i + 1]) << 8);
    out.push_back(alphabet[(n >> 18) & 63]);
    out.push_back(alphabet[(n >> 12) & 63]);
    out.push_back(alphabet[(n >> 6) & 63]);
    out += "=";
  }
  return out;
}

class HttpClient : public ModelClient {
public:
  explicit HttpClient(HttpClientConfig config) : config_(std::move(config)) {
    const std::string& url = config_.endpoint_url;
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw QaError("endpoint URL missing scheme: " + url);
    const std::string scheme = url.substr(0, scheme_end);
    if (scheme != "http") throw QaError("only http endpoints are supported, got " + scheme);
    const auto path_start = url.find('/', scheme_end + 3);
    host_ = url.substr(scheme_end + 3,
                       path_start == std::string::npos ? std::string::npos
                                                       : path_start - scheme_end - 3);
    path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
  }

  std::string query(const ModelRequest& request) override {
    httplib::Client cli(host_);
    cli.set_connection_timeout(config_.timeout_seconds);
    cli.set_read_timeout(config_.timeout_seconds);
    httplib::Headers headers;
    if (!config_.auth_token.empty()) {
      headers.emplace("Authorization", "Bearer " + config_.auth_token);
    }

    const std::string body = config_.chat_completions ? chat_body(request) : plain_body(request);
    auto res = cli.Post(path_, headers, body, "application/json");
    if (!res) throw QaError("endpoint unreachable: " + host_);
    if (res->status != 200) {
      throw QaError("endpoint returned status " + std::to_string(res->status));
    }
    const auto j = nlohmann::json::parse(res->body);
    if (config_.chat_completions) {
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    }
    return j.at("text").get<std::string>();
  }

  std::string name() const override { return config_.model; }

private:
  std::string plain_body(const ModelRequest& request) const {
    ordered_json j = {{"model", config_.model},
                      {"system", request.prompt.system},
                      {"prompt", request.prompt.user}};
    if (config_.send_image && !request.prompt.image_path.empty()) {
      std::ifstream in(request.prompt.image_path, std::ios::binary);
      if (in) {
        std::ostringstream buf;
        buf << in.rdbuf();
        j["image_base64"] = base64_encode(buf.str());
      }
    }
    if (request.prompt.table_text) j["table_text"] = *request.prompt.table_text;
    return j.dump();
  }

  std::string chat_body(const ModelRequest& request) const {
    ordered_json j = {{"model", config_.model},
                      {"messages",
                       ordered_json::array({{{"role", "system"}, {"content", request.prompt.system}},
                                            {{"role", "user"}, {"content", request.prompt.user}}})}};
    return j.dump();
  }

  HttpClientConfig config_;
  std::string host_;
  std::string path_;
};

}  // namespace

const char* to_string(EvalMode mode) {
  switch (mode) {
    case EvalMode::ImageOnly: return "image_only";
    case EvalMode::ImagePlusBaseTable: return "image_plus_base_table";
    case EvalMode::ImagePlusFineTunedTable: return "image_plus_finetuned_table";
  }
  return "image_only";
}

EvalMode eval_mode_from_string(const std::string& s) {
  if (s == "image_only" || s == "img") return EvalMode::ImageOnly;
  if (s == "image_plus_base_table" || s == "base_table" || s == "bt") {
    return EvalMode::ImagePlusBaseTable;
  }
  if (s == "image_plus_finetuned_table" || s == "finetuned_table" || s == "ft") {
    return EvalMode::ImagePlusFineTunedTable;
  }
  throw QaError("unknown configuration: " + s);
}

const std::string& answer_system_prompt() {
  static const std::string prompt =
      "You are a helpful assistant that answers queries based on charts and tables. "
      "Study the inputs and return only the final integer answer. Do not include explanations.";
  return prompt;
}

const std::string& answer_task_prompt() {
  static const std::string prompt =
      "Study the chart or the given table and think step by step to arrive at the final integer "
      "answer. Only return the final integer answer, no description is required.\n";
  return prompt;
}

const std::string& query_generation_system_prompt() {
  static const std::string prompt = "You are a helpful assistant. Help me with my math homework!";
  return prompt;
}

std::string query_generation_prompt(const std::string& table_text) {
  return "\nYou are an AI assistant tasked with analyzing tabular data extracted from bar chart "
         "visualizations. Your job is to generate a single query based on the given table and "
         "provide the correct answer as a single integer derived from the data.\n"
         "\n"
         "Output Requirements:\n"
         "- Generate one meaningful query based on the table.\n"
         "- Ensure the query is clear, concise, and specific to a value from the table.\n"
         "- Provide the correct answer to the query as a single integer.\n"
         "\n"
         "The following table is represented as text. \"|\" separates columns (labels and "
         "values), and newline marks the end of each row.\n"
         "\n" +
         table_text +
         "\n"
         "\n"
         "Provide the output in the following JSON format:\n"
         "{\n"
         "  \"query\": \"<generated question>\",\n"
         "  \"correct_answer\": <integer answer>\n"
         "}\n";
}

QaPair lookup_question(const LinearizedTable& table, const Entry& entry,
                       const std::string& chart_id) {
  QaPair pair;
  pair.chart_id = chart_id;
  if (table.is_simple_form()) {
    pair.query = "What is the value of " + entry.row_key + "?";
  } else {
    pair.query = "What is the value of " + entry.row_key + " for " + entry.col_key + "?";
  }
  if (!entry.value.number) throw QaError("lookup over a textual entry");
  pair.correct_answer = rounded(*entry.value.number);
  return pair;
}

QaPair difference_question(const Entry& a, const Entry& b, const std::string& chart_id) {
  if (!a.value.number || !b.value.number) throw QaError("difference over textual entries");
  QaPair pair;
  pair.chart_id = chart_id;
  if (a.row_key == b.row_key && a.col_key != b.col_key) {
    pair.query = "What is the difference between the " + a.row_key + " value of " + a.col_key +
                 " and " + b.col_key + "?";
  } else if (a.col_key == b.col_key) {
    pair.query =
        "What is the difference between the value of " + a.row_key + " and " + b.row_key + "?";
  } else {
    pair.query = "What is the difference between the " + a.row_key + " value of " + a.col_key +
                 " and the " + b.row_key + " value of " + b.col_key + "?";
  }
  pair.correct_answer = rounded(*a.value.number - *b.value.number);
  return pair;
}

QaPair row_sum_question(const LinearizedTable& table, std::size_t row_index,
                        const std::string& chart_id) {
  const DataRow& row = table.rows.at(row_index);
  double sum = 0.0;
  bool any = false;
  for (const auto& cell : row.cells) {
    if (cell.number) {
      sum += *cell.number;
      any = true;
    }
  }
  if (!any) throw QaError("row has no numeric cells");
  QaPair pair;
  pair.chart_id = chart_id;
  pair.query = "What is the sum of all values for " + row.row_header + "?";
  pair.correct_answer = rounded(sum);
  return pair;
}

std::vector<QaPair> generate_qa_pairs(const LinearizedTable& table, const std::string& chart_id,
                                      uint64_t rng_seed, std::size_t count) {
  const EntrySet all = to_entries(table);
  std::vector<Entry> numeric;
  for (const auto& e : all.entries) {
    if (e.value.number) numeric.push_back(e);
  }
  if (numeric.empty()) throw QaError("table has no numeric entries");

  detail::Rng rng(rng_seed);
  std::vector<QaPair> pairs;
  std::size_t attempts = 0;
  const std::size_t max_attempts = count * 40 + 40;
  while (pairs.size() < count && attempts++ < max_attempts) {
    QaPair candidate;
    const int64_t tmpl = rng.uniform_int(0, 2);
    try {
      if (tmpl == 0) {
        candidate = lookup_question(table, numeric[rng.index(numeric.size())], chart_id);
      } else if (tmpl == 1 && numeric.size() >= 2) {
        const std::size_t i = rng.index(numeric.size());
        std::size_t j = rng.index(numeric.size() - 1);
        if (j >= i) ++j;
        candidate = difference_question(numeric[i], numeric[j], chart_id);
      } else {
        candidate = row_sum_question(table, rng.index(table.rows.size()), chart_id);
      }
    } catch (const QaError&) {
      continue;
    }
    if (candidate.correct_answer == 0) continue;  // keeps MAPE well-defined
    const bool duplicate = std::any_of(pairs.begin(), pairs.end(), [&](const QaPair& p) {
      return p.query == candidate.query;
    });
    if (!duplicate || attempts > max_attempts / 2) pairs.push_back(std::move(candidate));
  }
  if (pairs.empty()) throw QaError("could not generate a nonzero-answer question");
  return pairs;
}

PromptBundle build_prompt(const QaPair& pair, const EvalConfiguration& cfg,
                          const std::optional<std::string>& table_text,
                          const std::string& image_path) {
  const bool needs_table = cfg.mode != EvalMode::ImageOnly;
  if (needs_table && !table_text) throw QaError("configuration requires a table text");

  PromptBundle bundle;
  bundle.system = answer_system_prompt();
  bundle.image_path = image_path;
  std::string user = answer_task_prompt();
  user += "\nQuery: " + pair.query + "\n";
  if (needs_table) {
    bundle.table_text = *table_text;
    user += "\nTable:\n" + *table_text + "\n";
  }
  bundle.user = std::move(user);
  return bundle;
}

std::optional<long long> extract_integer(const std::string& response, ExtractOrder order) {
  static const std::regex number_re(R"([+-]?\d+(\.\d+)?)");
  std::optional<long long> found;
  for (auto it = std::sregex_iterator(response.begin(), response.end(), number_re);
       it != std::sregex_iterator(); ++it) {
    const long long value = rounded(std::stod(it->str()));
    if (order == ExtractOrder::First) return value;
    found = value;
  }
  return found;
}

double mape(const std::vector<double>& truth, const std::vector<double>& pred,
            std::size_t* usable_pairs) {
  if (truth.size() != pred.size()) throw QaError("mape: length mismatch");
  if (truth.empty()) throw QaError("mape: empty input");
  double sum = 0.0;
  std::size_t usable = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == 0.0) continue;
    sum += std::abs(truth[i] - pred[i]) / std::abs(truth[i]);
    ++usable;
  }
  if (usable_pairs) *usable_pairs = usable;
  if (usable == 0) throw QaError("mape: all ground-truth values are zero");
  return 100.0 * sum / static_cast<double>(usable);
}

double rmse(const std::vector<double>& truth, const std::vector<double>& pred) {
  if (truth.size() != pred.size()) throw QaError("rmse: length mismatch");
  if (truth.empty()) throw QaError("rmse: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = truth[i] - pred[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(truth.size()));
}

double relative_improvement(double mape_1, double mape_2) {
  if (mape_1 == 0.0) throw QaError("relative improvement undefined for zero baseline MAPE");
  return (mape_1 - mape_2) / mape_1 * 100.0;
}

double config_delta(double metric_c1, double metric_c2) {
  return std::abs(metric_c1 - metric_c2);
}

std::unique_ptr<ModelClient> make_oracle_client(const std::vector<QaPair>& pairs) {
  return std::make_unique<OracleClient>(pairs, 0.0, "mock-oracle");
}

std::unique_ptr<ModelClient> make_perturb_client(const std::vector<QaPair>& pairs,
                                                 double percent) {
  return std::make_unique<OracleClient>(pairs, percent,
                                        "mock-perturb-" + format_value(percent));
}

std::unique_ptr<ModelClient> make_refuse_client() { return std::make_unique<RefuseClient>(); }

std::unique_ptr<ModelClient> make_http_client(const HttpClientConfig& config) {
  return std::make_unique<HttpClient>(config);
}

QaRunResult run_eval(const std::vector<ManifestRecord>& manifest,
                     const std::vector<QaPair>& pairs, const EvalConfiguration& cfg,
                     ModelClient& client, const std::filesystem::path& dataset_root,
                     const RunOptions& options) {
  std::unordered_map<std::string, const ManifestRecord*> by_id;
  for (const auto& rec : manifest) by_id[rec.id] = &rec;

  std::unordered_map<std::string, std::string> tables;
  if (cfg.mode != EvalMode::ImageOnly) {
    std::ifstream in(cfg.table_source);
    if (!in) throw QaError("cannot read prediction bundle: " + cfg.table_source.string());
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      tables[j.at("id").get<std::string>()] = j.at("table_text").get<std::string>();
    }
  }

  // validate preconditions up front so worker threads cannot race on them
  for (const auto& pair : pairs) {
    auto it = by_id.find(pair.chart_id);
    if (it == by_id.end()) throw QaError("chart id not in manifest: " + pair.chart_id);
    if (cfg.mode != EvalMode::ImageOnly && !tables.count(pair.chart_id)) {
      throw QaError("prediction bundle has no table for chart " + pair.chart_id);
    }
  }

  QaRunResult result;
  result.records.resize(pairs.size());
  std::atomic<std::size_t> next{0};
  const std::size_t workers = std::max<std::size_t>(1, std::min(options.jobs, pairs.size()));
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < pairs.size(); i = next.fetch_add(1)) {
        const QaPair& pair = pairs[i];
        const ManifestRecord& rec = *by_id.at(pair.chart_id);
        QaRunRecord record;
        record.chart_id = pair.chart_id;
        record.configuration = to_string(cfg.mode);
        record.model_name = client.name();
        record.query = pair.query;
        record.correct_answer = pair.correct_answer;

        std::optional<std::string> table_text;
        if (cfg.mode != EvalMode::ImageOnly) table_text = tables.at(pair.chart_id);
        ModelRequest request;
        request.chart_id = pair.chart_id;
        request.prompt =
            build_prompt(pair, cfg, table_text, (dataset_root / rec.image_path).string());

        for (std::size_t attempt = 0; attempt <= options.retries; ++attempt) {
          try {
            record.raw_response = client.query(request);
            record.error.clear();
            break;
          } catch (const std::exception& e) {
            record.error = e.what();
            if (attempt < options.retries) {
              std::this_thread::sleep_for(
                  std::chrono::milliseconds(options.backoff_ms << attempt));
            }
          }
        }
        if (record.error.empty()) record.extracted = extract_integer(record.raw_response);
        result.records[i] = std::move(record);
      }
    });
  }
  for (auto& t : pool) t.join();

  QaReport& report = result.report;
  report.model_name = client.name();
  report.configuration = to_string(cfg.mode);
  std::vector<double> truth, pred;
  for (const auto& record : result.records) {
    if (!record.extracted) {
      ++report.extraction_failures;
      continue;
    }
    truth.push_back(static_cast<double>(record.correct_answer));
    pred.push_back(static_cast<double>(*record.extracted));
  }
  report.n = truth.size();
  if (report.n > 0) {
    std::size_t usable = 0;
    report.mape_percent = mape(truth, pred, &usable);
    report.zero_truth_excluded = report.n - usable;
    report.rmse = rmse(truth, pred);
  }
  return result;
}

std::vector<QaPair> load_qa_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw QaError("cannot read QA file: " + path.string());
  std::vector<QaPair> pairs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    QaPair pair;
    pair.chart_id = j.at("chart_id").get<std::string>();
    pair.query = j.at("query").get<std::string>();
    pair.correct_answer = j.at("correct_answer").get<long long>();
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

void save_qa_file(const std::vector<QaPair>& pairs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw QaError("cannot write QA file: " + path.string());
  for (const auto& pair : pairs) {
    ordered_json j = {{"chart_id", pair.chart_id},
                      {"query", pair.query},
                      {"correct_answer", pair.correct_answer}};
    out << j.dump() << "\n";
  }
}

std::string qa_report_json(const QaReport& report) {
  ordered_json j = {{"model", report.model_name},
                    {"configuration", report.configuration},
                    {"n", report.n},
                    {"mape_percent", report.n ? ordered_json(report.mape_percent) : ordered_json(nullptr)},
                    {"rmse", report.n ? ordered_json(report.rmse) : ordered_json(nullptr)},
                    {"extraction_failures", report.extraction_failures},
                    {"zero_truth_excluded", report.zero_truth_excluded}};
  return j.dump();
}

QaReport qa_report_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  QaReport report;
  report.model_name = j.at("model").get<std::string>();
  report.configuration = j.value("configuration", std::string("image_only"));
  report.n = j.value("n", std::size_t{0});
  if (j.contains("mape_percent") && !j.at("mape_percent").is_null()) {
    report.mape_percent = j.at("mape_percent").get<double>();
  }
  if (j.contains("rmse") && !j.at("rmse").is_null()) {
    report.rmse = j.at("rmse").get<double>();
  }
  report.extraction_failures = j.value("extraction_failures", std::size_t{0});
  report.zero_truth_excluded = j.value("zero_truth_excluded", std::size_t{0});
  return report;
}

std::string qa_record_json(const QaRunRecord& record) {
  ordered_json j = {{"chart_id", record.chart_id},
                    {"configuration", record.configuration},
                    {"model", record.model_name},
                    {"query", record.query},
                    {"raw_response", record.raw_response},
                    {"extracted", record.extracted ? ordered_json(*record.extracted) : ordered_json(nullptr)},
                    {"correct_answer", record.correct_answer}};
  if (!record.error.empty()) j["error"] = record.error;
  return j.dump();
}

}  // namespace charteval
