#include "charteval/chartgen.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <mutex>
#include <fstream>
#include <set>
#include <numeric>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "charteval/render.hpp"
#include "rng.hpp"

namespace charteval {

using detail::Rng;
using detail::splitmix64;

namespace {

using ordered_json = nlohmann::ordered_json;

ChartSpec sample_spec_typed(const GeneratorConfig& config, std::size_t index, ChartType type) {
  const uint64_t seed = splitmix64(config.master_seed) ^ splitmix64(0x517cc1b727220a95ULL + index);
  Rng rng(seed);
  const VocabLists& vocab = config.vocab;

  ChartSpec spec;
  char id[32];
  std::snprintf(id, sizeof(id), "chart_%06zu", index);
  spec.id = id;
  spec.chart_type = type;
  spec.seed = seed;
  spec.orientation = rng.bernoulli(config.horizontal_probability) ? Orientation::Horizontal
                                                                  : Orientation::Vertical;
  spec.annotate = rng.bernoulli(config.annotate_probability);
  spec.title = vocab.titles[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<int64_t>(vocab.titles.size()) - 1))];
  spec.x_label = vocab.x_labels[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<int64_t>(vocab.x_labels.size()) - 1))];
  spec.y_label = vocab.y_labels[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<int64_t>(vocab.y_labels.size()) - 1))];

  const auto n_cats = static_cast<std::size_t>(rng.uniform_int(
      static_cast<int64_t>(config.min_categories), static_cast<int64_t>(config.max_categories)));
  spec.categories = rng.pick_distinct(vocab.categories, n_cats);

  if (type == ChartType::Simple) {
    spec.series_names = {spec.y_label};
  } else {
    const auto n_series = static_cast<std::size_t>(rng.uniform_int(
        static_cast<int64_t>(config.min_series), static_cast<int64_t>(config.max_series)));
    spec.series_names = rng.pick_distinct(vocab.series_names, n_series);
  }

  auto range = type == ChartType::Simple ? config.value_range_simple : config.value_range_multi;
  if (!config.allow_negative) range.first = std::max(range.first, 0.0);

  spec.values.resize(spec.categories.size());
  for (auto& row : spec.values) {
    row.resize(spec.series_names.size());
    for (double& v : row) {
      if (config.integer_values) {
        v = static_cast<double>(rng.uniform_int(static_cast<int64_t>(std::ceil(range.first)),
                                                static_cast<int64_t>(std::floor(range.second))));
      } else {
        v = rng.uniform_real(range.first, range.second);
      }
    }
  }
  return spec;
}

ordered_json spec_to_json(const ChartSpec& spec) {
  ordered_json values = ordered_json::array();
  for (const auto& row : spec.values) {
    ordered_json jrow = ordered_json::array();
    for (double v : row) {
      const auto as_int = static_cast<int64_t>(v);
      if (static_cast<double>(as_int) == v) {
        jrow.push_back(as_int);
      } else {
        jrow.push_back(v);
      }
    }
    values.push_back(std::move(jrow));
  }
  return ordered_json{{"id", spec.id},
                      {"chart_type", to_string(spec.chart_type)},
                      {"orientation", to_string(spec.orientation)},
                      {"title", spec.title},
                      {"x_label", spec.x_label},
                      {"y_label", spec.y_label},
                      {"categories", spec.categories},
                      {"series_names", spec.series_names},
                      {"values", std::move(values)},
                      {"annotate", spec.annotate},
                      {"seed", spec.seed}};
}

ChartSpec spec_from_json(const nlohmann::json& j) {
  ChartSpec spec;
  spec.id = j.at("id").get<std::string>();
  spec.chart_type = chart_type_from_string(j.at("chart_type").get<std::string>());
  spec.orientation = orientation_from_string(j.at("orientation").get<std::string>());
  spec.title = j.at("title").get<std::string>();
  spec.x_label = j.at("x_label").get<std::string>();
  spec.y_label = j.at("y_label").get<std::string>();
  spec.categories = j.at("categories").get<std::vector<std::string>>();
  spec.series_names = j.at("series_names").get<std::vector<std::string>>();
  for (const auto& jrow : j.at("values")) {
    spec.values.push_back(jrow.get<std::vector<double>>());
  }
  spec.annotate = j.at("annotate").get<bool>();
  spec.seed = j.at("seed").get<uint64_t>();
  return spec;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

const char* to_string(ChartType t) {
  switch (t) {
    case ChartType::Simple: return "simple";
    case ChartType::Stacked: return "stacked";
    case ChartType::Grouped: return "grouped";
  }
  return "simple";
}

const char* to_string(Orientation o) {
  return o == Orientation::Horizontal ? "horizontal" : "vertical";
}

ChartType chart_type_from_string(const std::string& s) {
  if (s == "simple") return ChartType::Simple;
  if (s == "stacked") return ChartType::Stacked;
  if (s == "grouped") return ChartType::Grouped;
  throw InvalidConfig("unknown chart type: " + s);
}

Orientation orientation_from_string(const std::string& s) {
  if (s == "vertical") return Orientation::Vertical;
  if (s == "horizontal") return Orientation::Horizontal;
  throw InvalidConfig("unknown orientation: " + s);
}

const VocabLists& financial_vocab() {
  static const VocabLists vocab = {
      // titles
      {"Quarterly Revenue Growth", "Market Share by Region", "Profitability Comparison",
       "Strategic Human Capital Management", "Financial Metrics", "Global Competitive Advantage",
       "Sustainable Development Goals", "Corporate Ethics", "Market Segmentation",
       "Venture Capital Funding", "Digital Marketing Trends", "Strategic Marketing Campaigns",
       "Strategic Employee Development", "Annual Cost Breakdown", "Liquidity Risk Overview",
       "Capital Allocation Review", "Dividend Policy Analysis", "Operating Margin Trends"},
      // x-axis labels
      {"Fiscal Quarter", "Region", "Product Category", "Content Engagement Metric",
       "Market Trend Analysis", "Product Reliability Metric", "Operating Profit",
       "Asset Turnover Ratio", "Employee Department", "Skill Level", "Business Unit",
       "Reporting Period"},
      // y-axis labels
      {"Revenue ($)", "Profit Margin (%)", "Market Capitalization ($B)", "Asset Turnover Ratio",
       "Product Customization Metric", "Dividends_Per_Share($)", "EBT_Dollars($)",
       "Operating Expenses ($M)", "Net Income ($M)", "Cash Flow ($M)"},
      // categories
      {"Billing", "Equity", "Sales", "Income", "Depreciation", "Valuation", "Loans",
       "Expenditures", "Accounts", "Audit", "Subsidies", "Profit", "Revenues", "Costs",
       "Invoices", "Capital", "Cash", "Operating", "Balances", "Leverage", "Investments",
       "Accounting", "Payroll", "Reserves", "Securities", "Margins", "Futures", "Statements",
       "Variable", "Projections", "Withdrawals", "Royalties", "Payables"},
      // series names
      {"Société Générale", "Bank of China", "Aomori Bank", "Bank of Yokohama", "State Street",
       "Shimane Bank", "Handelsbanken", "Bank of Montreal", "WisdomTree Japan",
       "Royal Bank of Scotland", "Hokkoku Bank", "Sumitomo Mitsui Financial Group",
       "Tokyo Marine Asset Management", "Nomura Securities", "Monex Group",
       "Rakuten Securities", "Citibank", "Mizuho Bank", "China Merchants Bank"},
  };
  return vocab;
}

VocabLists load_vocab(const std::filesystem::path& json_path) {
  std::ifstream in(json_path);
  if (!in) throw InvalidConfig("cannot read vocab file: " + json_path.string());
  nlohmann::json j = nlohmann::json::parse(in);
  VocabLists vocab;
  vocab.titles = j.at("titles").get<std::vector<std::string>>();
  vocab.x_labels = j.at("x_labels").get<std::vector<std::string>>();
  vocab.y_labels = j.at("y_labels").get<std::vector<std::string>>();
  vocab.categories = j.at("categories").get<std::vector<std::string>>();
  vocab.series_names = j.at("series_names").get<std::vector<std::string>>();
  return vocab;
}

void validate(const GeneratorConfig& config) {
  if (config.total == 0) throw InvalidConfig("total must be positive");
  const double mix = config.mix_simple + config.mix_stacked + config.mix_grouped;
  if (std::abs(mix - 1.0) > 1e-9) throw InvalidConfig("chart-type mix must sum to 1");
  if (config.mix_simple < 0 || config.mix_stacked < 0 || config.mix_grouped < 0) {
    throw InvalidConfig("mix proportions must be non-negative");
  }
  if (config.value_range_simple.first >= config.value_range_simple.second ||
      config.value_range_multi.first >= config.value_range_multi.second) {
    throw InvalidConfig("value range lo must be below hi");
  }
  if (config.min_categories < 2 || config.max_categories < config.min_categories) {
    throw InvalidConfig("bad category count range");
  }
  if (config.min_series < 1 || config.max_series < config.min_series) {
    throw InvalidConfig("bad series count range");
  }
  const VocabLists& v = config.vocab;
  for (const auto* list : {&v.titles, &v.x_labels, &v.y_labels, &v.categories, &v.series_names}) {
    if (list->empty()) throw InvalidConfig("vocab list is empty");
    for (const auto& term : *list) {
      if (term.find('|') != std::string::npos || term.find("<0x0A>") != std::string::npos) {
        throw InvalidConfig("vocab term contains a grammar delimiter: " + term);
      }
    }
  }
  if (v.categories.size() < config.max_categories) {
    throw InvalidConfig("category vocab smaller than max_categories");
  }
  if (v.series_names.size() < config.max_series) {
    throw InvalidConfig("series vocab smaller than max_series");
  }
}

GeneratorConfig load_generator_config(const std::filesystem::path& json_path) {
  std::ifstream in(json_path);
  if (!in) throw InvalidConfig("cannot read config file: " + json_path.string());
  nlohmann::json j = nlohmann::json::parse(in);

  static const std::set<std::string> known = {
      "total",          "mix",        "value_range_simple", "value_range_multi",
      "allow_negative", "integer_values", "annotate_probability", "horizontal_probability",
      "min_categories", "max_categories", "min_series", "max_series",
      "master_seed",    "vocab_path", "vocab"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw InvalidConfig("unknown config key: " + key);
  }

  GeneratorConfig config;
  config.total = j.value("total", config.total);
  if (j.contains("mix")) {
    const auto& mix = j.at("mix");
    config.mix_simple = mix.value("simple", 0.0);
    config.mix_stacked = mix.value("stacked", 0.0);
    config.mix_grouped = mix.value("grouped", 0.0);
  }
  auto read_range = [&](const char* key, std::pair<double, double>& range) {
    if (!j.contains(key)) return;
    const auto& r = j.at(key);
    range = {r.at(0).get<double>(), r.at(1).get<double>()};
  };
  read_range("value_range_simple", config.value_range_simple);
  read_range("value_range_multi", config.value_range_multi);
  config.allow_negative = j.value("allow_negative", config.allow_negative);
  config.integer_values = j.value("integer_values", config.integer_values);
  config.annotate_probability = j.value("annotate_probability", config.annotate_probability);
  config.horizontal_probability = j.value("horizontal_probability", config.horizontal_probability);
  config.min_categories = j.value("min_categories", config.min_categories);
  config.max_categories = j.value("max_categories", config.max_categories);
  config.min_series = j.value("min_series", config.min_series);
  config.max_series = j.value("max_series", config.max_series);
  config.master_seed = j.value("master_seed", config.master_seed);
  if (j.contains("vocab_path")) {
    config.vocab = load_vocab(json_path.parent_path() / j.at("vocab_path").get<std::string>());
  } else if (j.contains("vocab")) {
    const auto& v = j.at("vocab");
    config.vocab.titles = v.at("titles").get<std::vector<std::string>>();
    config.vocab.x_labels = v.at("x_labels").get<std::vector<std::string>>();
    config.vocab.y_labels = v.at("y_labels").get<std::vector<std::string>>();
    config.vocab.categories = v.at("categories").get<std::vector<std::string>>();
    config.vocab.series_names = v.at("series_names").get<std::vector<std::string>>();
  }
  return config;
}

std::array<std::size_t, 3> type_counts(const GeneratorConfig& config) {
  const std::array<double, 3> mix = {config.mix_simple, config.mix_stacked, config.mix_grouped};
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> remainders{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double exact = static_cast<double>(config.total) * mix[i];
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    remainders[i] = exact - std::floor(exact);
    assigned += counts[i];
  }
  // largest remainder first; ties go to the earlier type
  std::array<std::size_t, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  for (std::size_t k = 0; assigned < config.total; ++k, ++assigned) counts[order[k % 3]] += 1;
  return counts;
}

std::vector<ChartType> plan_types(const GeneratorConfig& config) {
  const auto counts = type_counts(config);
  std::vector<ChartType> plan;
  plan.reserve(config.total);
  plan.insert(plan.end(), counts[0], ChartType::Simple);
  plan.insert(plan.end(), counts[1], ChartType::Stacked);
  plan.insert(plan.end(), counts[2], ChartType::Grouped);
  Rng rng(splitmix64(config.master_seed) ^ 0x2545f4914f6cdd1dULL);
  rng.shuffle(plan);
  return plan;
}

ChartSpec sample_spec(const GeneratorConfig& config, std::size_t index) {
  validate(config);
  if (index >= config.total) throw InvalidConfig("index out of range");
  return sample_spec_typed(config, index, plan_types(config)[index]);
}

LinearizedTable ground_truth(const ChartSpec& spec) {
  LinearizedTable table;
  table.title = spec.title;
  if (spec.chart_type == ChartType::Simple) {
    table.header = {spec.x_label, spec.y_label};
  } else {
    // Per the linearization templates, the horizontal layouts lead with
    // the y-axis label, the vertical ones with the x-axis label.
    table.header.push_back(spec.orientation == Orientation::Horizontal ? spec.y_label
                                                                       : spec.x_label);
    for (const auto& s : spec.series_names) table.header.push_back(s);
  }
  for (std::size_t i = 0; i < spec.categories.size(); ++i) {
    DataRow row;
    row.row_header = spec.categories[i];
    for (double v : spec.values[i]) row.cells.push_back(CellValue::from_number(v));
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string manifest_record_json(const ManifestRecord& record) {
  ordered_json j = {{"id", record.id},
                    {"chart_type", to_string(record.chart_type)},
                    {"orientation", to_string(record.orientation)},
                    {"image_path", record.image_path},
                    {"ground_truth_text", record.ground_truth_text},
                    {"spec", spec_to_json(record.spec)}};
  return j.dump();
}

ManifestRecord manifest_record_from_json(const std::string& line) {
  nlohmann::json j = nlohmann::json::parse(line);
  ManifestRecord record;
  record.id = j.at("id").get<std::string>();
  record.chart_type = chart_type_from_string(j.at("chart_type").get<std::string>());
  record.orientation = orientation_from_string(j.at("orientation").get<std::string>());
  record.image_path = j.at("image_path").get<std::string>();
  record.ground_truth_text = j.at("ground_truth_text").get<std::string>();
  record.spec = spec_from_json(j.at("spec"));
  return record;
}

DatasetSummary generate_dataset(const GeneratorConfig& config,
                                const std::filesystem::path& out_dir, std::size_t jobs,
                                bool render_images) {
  validate(config);
  namespace fs = std::filesystem;
  fs::create_directories(out_dir / "images");
  fs::create_directories(out_dir / "tables");

  const auto plan = plan_types(config);
  std::vector<ManifestRecord> records(config.total);
  std::ostringstream manifest;
  for (std::size_t i = 0; i < config.total; ++i) {
    ChartSpec spec = sample_spec_typed(config, i, plan[i]);
    ManifestRecord rec;
    rec.id = spec.id;
    rec.chart_type = spec.chart_type;
    rec.orientation = spec.orientation;
    rec.image_path = (fs::path("images") / (spec.id + ".png")).generic_string();
    rec.ground_truth_text = serialize(ground_truth(spec));
    rec.spec = std::move(spec);
    manifest << manifest_record_json(rec) << "\n";
    records[i] = std::move(rec);
  }

  DatasetSummary summary;
  summary.total = config.total;
  summary.counts_by_type = type_counts(config);
  summary.manifest_path = out_dir / "manifest.jsonl";

  const std::string manifest_text = manifest.str();
  if (fs::exists(summary.manifest_path) && read_file(summary.manifest_path) == manifest_text) {
    summary.up_to_date = true;
  }

  for (const auto& rec : records) {
    write_file(out_dir / "tables" / (rec.id + ".txt"), rec.ground_truth_text);
  }

  if (render_images) {
    std::atomic<std::size_t> next{0};
    const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, config.total));
    std::vector<std::thread> pool;
    std::atomic<bool> failed{false};
    std::string error_message;
    std::mutex error_mutex;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < records.size(); i = next.fetch_add(1)) {
          if (failed.load()) return;
          try {
            render_chart(records[i].spec, out_dir / records[i].image_path);
          } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(error_mutex);
            error_message = e.what();
            failed.store(true);
            return;
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failed.load()) throw RenderError("render failed: " + error_message);
  }

  write_file(summary.manifest_path, manifest_text);
  return summary;
}

std::vector<ManifestRecord> load_manifest(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot read manifest: " + manifest_path.string());
  std::vector<ManifestRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    records.push_back(manifest_record_from_json(line));
  }
  return records;
}

}  // namespace charteval
