#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "charteval/table.hpp"

namespace charteval {

enum class ChartType { Simple, Stacked, Grouped };
enum class Orientation { Vertical, Horizontal };

const char* to_string(ChartType t);
const char* to_string(Orientation o);
ChartType chart_type_from_string(const std::string& s);
Orientation orientation_from_string(const std::string& s);

/// Full recipe for one synthetic chart.
struct ChartSpec {
  std::string id;
  ChartType chart_type = ChartType::Simple;
  Orientation orientation = Orientation::Vertical;
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<std::string> categories;
  std::vector<std::string> series_names;  // size 1 for Simple
  std::vector<std::vector<double>> values;  // categories x series
  bool annotate = false;
  uint64_t seed = 0;
};

struct VocabLists {
  std::vector<std::string> titles;
  std::vector<std::string> x_labels;
  std::vector<std::string> y_labels;
  std::vector<std::string> categories;
  std::vector<std::string> series_names;
};

/// Curated financial vocabulary used by default.
const VocabLists& financial_vocab();

VocabLists load_vocab(const std::filesystem::path& json_path);

struct GeneratorConfig {
  std::size_t total = 0;
  double mix_simple = 0.5;
  double mix_stacked = 0.3;
  double mix_grouped = 0.2;
  std::pair<double, double> value_range_simple = {-100.0, 100.0};
  std::pair<double, double> value_range_multi = {100.0, 1000.0};
  bool allow_negative = true;
  bool integer_values = true;
  double annotate_probability = 0.5;
  double horizontal_probability = 0.5;
  std::size_t min_categories = 3, max_categories = 7;
  std::size_t min_series = 2, max_series = 5;
  VocabLists vocab = financial_vocab();
  uint64_t master_seed = 0;
};

class InvalidConfig : public std::runtime_error {
public:
  explicit InvalidConfig(const std::string& what) : std::runtime_error(what) {}
};

void validate(const GeneratorConfig& config);

/// Reads a GeneratorConfig from a JSON file. Unknown keys are
/// rejected; omitted keys keep their defaults. A "vocab_path" key (or
/// inline "vocab" object) replaces the built-in financial vocabulary.
GeneratorConfig load_generator_config(const std::filesystem::path& json_path);

/// Exact per-type counts by largest-remainder apportionment of
/// total * mix, in Simple/Stacked/Grouped order.
std::array<std::size_t, 3> type_counts(const GeneratorConfig& config);

/// The shuffled chart-type sequence all indices draw from; a pure
/// function of (master_seed, total, mix).
std::vector<ChartType> plan_types(const GeneratorConfig& config);

/// Deterministic in (master_seed, index).
ChartSpec sample_spec(const GeneratorConfig& config, std::size_t index);

LinearizedTable ground_truth(const ChartSpec& spec);

struct ManifestRecord {
  std::string id;
  ChartType chart_type;
  Orientation orientation;
  std::string image_path;
  std::string ground_truth_text;
  ChartSpec spec;
};

std::string manifest_record_json(const ManifestRecord& record);
ManifestRecord manifest_record_from_json(const std::string& line);

struct DatasetSummary {
  std::filesystem::path manifest_path;
  std::array<std::size_t, 3> counts_by_type{};
  std::size_t total = 0;
  bool up_to_date = false;  // existing manifest already matched byte-for-byte
};

/// Writes {out_dir}/images/{id}.png, {out_dir}/tables/{id}.txt and
/// {out_dir}/manifest.jsonl. Text artifacts are byte-identical across
/// reruns with the same config. `jobs` bounds render parallelism.
DatasetSummary generate_dataset(const GeneratorConfig& config,
                                const std::filesystem::path& out_dir,
                                std::size_t jobs = 1,
                                bool render_images = true);

std::vector<ManifestRecord> load_manifest(const std::filesystem::path& manifest_path);

}  // namespace charteval
