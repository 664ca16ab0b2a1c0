#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "charteval.h"

// Link sanity: the JSON batch surface is also exercised through the CLI,
// so these tests focus on handle lifetime, error reporting and the
// scalar metric entry points.

namespace fs = std::filesystem;

namespace {

const char* kSimple =
    "TITLE | Strategic Human Capital Management <0x0A> "
    "Content Engagement Metric | Asset Turnover Ratio <0x0A> "
    "Billing | 62 <0x0A> Equity | 84";

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("charteval_capi_" + tag)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("parse, serialize and free a table handle") {
  ce_table* t = nullptr;
  REQUIRE(ce_table_parse(kSimple, CE_PARSE_STRICT, &t) == CE_OK);
  REQUIRE(t != nullptr);
  CHECK(ce_table_entry_count(t) == 2);
  char* text = ce_table_serialize(t);
  REQUIRE(text != nullptr);
  CHECK(std::string(text) == kSimple);
  ce_string_free(text);
  ce_table_free(t);
}

TEST_CASE("parse failure sets status and thread-local error text") {
  ce_table* t = nullptr;
  CHECK(ce_table_parse("", CE_PARSE_STRICT, &t) == CE_ERR_PARSE);
  CHECK(t == nullptr);
  CHECK(std::strlen(ce_last_error()) > 0);
  CHECK(ce_table_parse(nullptr, CE_PARSE_STRICT, &t) == CE_ERR_INVALID_ARGUMENT);
  // a successful call clears the error
  REQUIRE(ce_table_parse(kSimple, CE_PARSE_STRICT, &t) == CE_OK);
  CHECK(std::strlen(ce_last_error()) == 0);
  ce_table_free(t);
}

TEST_CASE("lenient mode refolds pair streams through the C surface") {
  const char* pair_stream =
      "TITLE | Digital Marketing Trends <0x0A> "
      "Product Reliability Metric | Dividends_Per_Share($) <0x0A> "
      "Reserves | -35 | Margins | 61 | Cash | -34 | Payables | -59";
  ce_table* t = nullptr;
  CHECK(ce_table_parse(pair_stream, CE_PARSE_STRICT, &t) == CE_ERR_PARSE);
  REQUIRE(ce_table_parse(pair_stream, CE_PARSE_LENIENT, &t) == CE_OK);
  CHECK(ce_table_entry_count(t) == 4);
  ce_table_free(t);
}

TEST_CASE("rnss and rms over table handles") {
  ce_table* a = nullptr;
  ce_table* b = nullptr;
  REQUIRE(ce_table_parse(kSimple, CE_PARSE_STRICT, &a) == CE_OK);
  REQUIRE(ce_table_parse(kSimple, CE_PARSE_STRICT, &b) == CE_OK);
  double score = 0.0;
  REQUIRE(ce_rnss(a, b, &score) == CE_OK);
  CHECK(score == 1.0);
  const ce_metric_config cfg = ce_metric_config_default();
  CHECK(cfg.tau == 0.5);
  CHECK(cfg.theta == 1.0);
  CHECK(cfg.transposition_search == 1);
  ce_rms_result r{};
  REQUIRE(ce_rms(a, b, &cfg, &r) == CE_OK);
  CHECK(r.precision == 1.0);
  CHECK(r.recall == 1.0);
  CHECK(r.f1 == 1.0);
  // null config falls back to defaults
  REQUIRE(ce_rms(a, b, nullptr, &r) == CE_OK);
  CHECK(r.f1 == 1.0);
  ce_table_free(a);
  ce_table_free(b);
}

TEST_CASE("transpose through the C surface") {
  ce_table* t = nullptr;
  REQUIRE(ce_table_parse("A | S1 | S2 <0x0A> r1 | 1 | 2 <0x0A> r2 | 3 | 4",
                         CE_PARSE_STRICT, &t) == CE_OK);
  ce_table* tt = nullptr;
  REQUIRE(ce_table_transpose(t, &tt) == CE_OK);
  CHECK(ce_table_entry_count(tt) == 4);
  ce_table* back = nullptr;
  REQUIRE(ce_table_transpose(tt, &back) == CE_OK);
  char* s1 = ce_table_serialize(t);
  char* s2 = ce_table_serialize(back);
  CHECK(std::string(s1) == std::string(s2));
  ce_string_free(s1);
  ce_string_free(s2);
  ce_table_free(t);
  ce_table_free(tt);
  ce_table_free(back);
}

TEST_CASE("qa metric entry points") {
  const double truth[] = {62, -34};
  const double pred[] = {62, -17};
  double out = 0.0;
  REQUIRE(ce_mape(truth, pred, 2, &out) == CE_OK);
  CHECK(out == doctest::Approx(25.0).epsilon(1e-12));
  REQUIRE(ce_rmse(truth, pred, 2, &out) == CE_OK);
  CHECK(out == doctest::Approx(std::sqrt(289.0 / 2.0)).epsilon(1e-12));
  const double zeros[] = {0, 0};
  CHECK(ce_mape(zeros, pred, 2, &out) != CE_OK);
  REQUIRE(ce_relative_improvement(3.66, 2.06, &out) == CE_OK);
  CHECK(out == doctest::Approx(43.715846994535515).epsilon(1e-12));
  CHECK(ce_relative_improvement(0.0, 1.0, &out) != CE_OK);
  CHECK(ce_config_delta(16.07, 3.66) == doctest::Approx(12.41).epsilon(1e-12));
}

TEST_CASE("dataset generation, qa generation and evaluation through JSON batch calls") {
  TempDir dir("batch");
  const auto config_path = dir.path / "config.json";
  {
    std::ofstream out(config_path);
    out << R"({"total": 8, "master_seed": 5})";
  }
  char* summary = nullptr;
  REQUIRE(ce_generate_dataset(config_path.string().c_str(), (dir.path / "ds").string().c_str(),
                              2, /*render_images=*/0, &summary) == CE_OK);
  REQUIRE(summary != nullptr);
  CHECK(std::string(summary).find("\"total\":8") != std::string::npos);
  ce_string_free(summary);
  const auto manifest = (dir.path / "ds" / "manifest.jsonl").string();

  // self-score ground truths copied into a prediction bundle
  const auto preds = (dir.path / "preds.jsonl").string();
  {
    std::ifstream in(manifest);
    std::ofstream out(preds);
    std::string line;
    while (std::getline(in, line)) {
      const auto id_pos = line.find("\"id\":");
      const auto gt_pos = line.find("\"ground_truth_text\":");
      REQUIRE(id_pos != std::string::npos);
      REQUIRE(gt_pos != std::string::npos);
      const auto id_end = line.find(',', id_pos);
      const auto gt_end = line.find("\",\"spec\"", gt_pos);
      out << "{" << line.substr(id_pos, id_end - id_pos) << ",\"table_text\":"
          << line.substr(gt_pos + 20, gt_end - gt_pos - 20) << "\"}" << "\n";
    }
  }
  char* report = nullptr;
  REQUIRE(ce_eval_table(manifest.c_str(), preds.c_str(), nullptr, &report) == CE_OK);
  REQUIRE(report != nullptr);
  CHECK(std::string(report).find("\"mean_rnss\": 1.0") != std::string::npos);
  CHECK(std::string(report).find("\"mean_rms_f1\": 1.0") != std::string::npos);
  ce_string_free(report);

  const auto qa_path = (dir.path / "qa.jsonl").string();
  char* qa_summary = nullptr;
  REQUIRE(ce_generate_qa(manifest.c_str(), R"({"per_chart": 2, "seed": 3})", qa_path.c_str(),
                         &qa_summary) == CE_OK);
  ce_string_free(qa_summary);

  char* qa_report = nullptr;
  REQUIRE(ce_eval_qa(manifest.c_str(), qa_path.c_str(),
                     R"({"configuration": "image_only", "client": "oracle"})",
                     &qa_report) == CE_OK);
  REQUIRE(qa_report != nullptr);
  const std::string body(qa_report);
  CHECK(body.find("\"mape_percent\":0.0") != std::string::npos);
  CHECK(body.find("\"extraction_failures\":0") != std::string::npos);
  ce_string_free(qa_report);

  // bad options surface as invalid-argument with a message
  CHECK(ce_eval_qa(manifest.c_str(), qa_path.c_str(), R"({"client": "no_such_mock"})",
                   &qa_report) != CE_OK);
  CHECK(std::strlen(ce_last_error()) > 0);
}

TEST_CASE("report comparison through the C surface") {
  TempDir dir("cmp");
  auto write_report = [&](const std::string& name, const std::string& model,
                          const std::string& config, double mape_v) {
    std::ofstream out(dir.path / name);
    out << R"({"model":")" << model << R"(","configuration":")" << config
        << R"(","n":500,"mape_percent":)" << mape_v
        << R"(,"rmse":1.0,"extraction_failures":0,"zero_truth_excluded":0})";
    return (dir.path / name).string();
  };
  const auto a = write_report("a.json", "gpt-4o", "image_only", 16.07);
  const auto b = write_report("b.json", "gpt-4o", "image_plus_finetuned_table", 3.66);
  const char* paths[] = {a.c_str(), b.c_str()};
  char* out = nullptr;
  REQUIRE(ce_compare_reports(paths, 2, &out) == CE_OK);
  REQUIRE(out != nullptr);
  CHECK(std::string(out).find("12.41") != std::string::npos);
  ce_string_free(out);
  CHECK(ce_compare_reports(paths, 1, &out) != CE_OK);
}
