#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "charteval/chartgen.hpp"
#include "charteval/render.hpp"
#include "charteval/table.hpp"

using namespace charteval;
namespace fs = std::filesystem;

namespace {

GeneratorConfig small_config(std::size_t total, uint64_t seed) {
  GeneratorConfig cfg;
  cfg.total = total;
  cfg.master_seed = seed;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("charteval_test_" + tag)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("type_counts apportions exactly by largest remainder") {
  auto cfg = small_config(1000, 0);
  auto counts = type_counts(cfg);
  CHECK(counts[0] == 500);
  CHECK(counts[1] == 300);
  CHECK(counts[2] == 200);

  cfg.total = 7;  // 3.5 / 2.1 / 1.4 -> extra unit to the largest remainder
  counts = type_counts(cfg);
  CHECK(counts[0] == 4);
  CHECK(counts[1] == 2);
  CHECK(counts[2] == 1);
  CHECK(counts[0] + counts[1] + counts[2] == 7);

  cfg.total = 1;
  counts = type_counts(cfg);
  CHECK(counts[0] + counts[1] + counts[2] == 1);
}

TEST_CASE("plan_types is deterministic and matches the apportioned counts") {
  const auto cfg = small_config(100, 42);
  const auto plan = plan_types(cfg);
  REQUIRE(plan.size() == 100);
  CHECK(plan == plan_types(cfg));
  std::array<std::size_t, 3> seen{};
  for (auto t : plan) ++seen[static_cast<std::size_t>(t)];
  CHECK(seen == type_counts(cfg));
  // a different seed reorders the sequence
  auto other = cfg;
  other.master_seed = 43;
  CHECK(plan != plan_types(other));
}

TEST_CASE("sample_spec is deterministic and respects config bounds") {
  const auto cfg = small_config(40, 7);
  for (std::size_t i = 0; i < cfg.total; ++i) {
    const auto a = sample_spec(cfg, i);
    const auto b = sample_spec(cfg, i);
    CHECK(a.id == b.id);
    CHECK(a.title == b.title);
    CHECK(a.values == b.values);
    CHECK(a.categories.size() >= cfg.min_categories);
    CHECK(a.categories.size() <= cfg.max_categories);
    if (a.chart_type == ChartType::Simple) {
      CHECK(a.series_names.size() == 1);
    } else {
      CHECK(a.series_names.size() >= cfg.min_series);
      CHECK(a.series_names.size() <= cfg.max_series);
    }
    const auto range = a.chart_type == ChartType::Simple ? cfg.value_range_simple
                                                         : cfg.value_range_multi;
    for (const auto& row : a.values) {
      CHECK(row.size() == a.series_names.size());
      for (double v : row) {
        CHECK(v >= range.first);
        CHECK(v <= range.second);
        CHECK(v == static_cast<double>(static_cast<long long>(v)));  // integer_values
      }
    }
    // distinct category labels, no delimiter collisions
    std::set<std::string> cats(a.categories.begin(), a.categories.end());
    CHECK(cats.size() == a.categories.size());
    for (const auto& c : a.categories) {
      CHECK(c.find('|') == std::string::npos);
      CHECK(c.find("<0x0A>") == std::string::npos);
    }
  }
}

TEST_CASE("ground_truth mirrors the sampled chart recipe") {
  const auto cfg = small_config(30, 99);
  for (std::size_t i = 0; i < cfg.total; ++i) {
    const auto spec = sample_spec(cfg, i);
    const auto gt = ground_truth(spec);
    REQUIRE(gt.title == spec.title);
    REQUIRE(gt.rows.size() == spec.categories.size());
    if (spec.chart_type == ChartType::Simple) {
      REQUIRE(gt.header.size() == 2);
      CHECK(gt.header[0] == spec.x_label);
      CHECK(gt.header[1] == spec.y_label);
    } else {
      REQUIRE(gt.header.size() == 1 + spec.series_names.size());
      const auto& axis = spec.orientation == Orientation::Horizontal ? spec.y_label
                                                                     : spec.x_label;
      CHECK(gt.header[0] == axis);
      for (std::size_t s = 0; s < spec.series_names.size(); ++s)
        CHECK(gt.header[1 + s] == spec.series_names[s]);
    }
    for (std::size_t r = 0; r < gt.rows.size(); ++r) {
      CHECK(gt.rows[r].row_header == spec.categories[r]);
      REQUIRE(gt.rows[r].cells.size() == spec.values[r].size());
      for (std::size_t c = 0; c < spec.values[r].size(); ++c)
        CHECK(gt.rows[r].cells[c].number == spec.values[r][c]);
    }
  }
}

TEST_CASE("chart type and orientation distributions stay near their targets") {
  auto cfg = small_config(2000, 2024);
  cfg.annotate_probability = 0.5;
  cfg.horizontal_probability = 0.5;
  std::size_t horizontal = 0, annotated = 0;
  for (std::size_t i = 0; i < cfg.total; ++i) {
    const auto spec = sample_spec(cfg, i);
    horizontal += spec.orientation == Orientation::Horizontal;
    annotated += spec.annotate;
  }
  // Bernoulli(0.5) over 2000 draws: 3 sigma ~ 67
  CHECK(horizontal > 1000 - 70);
  CHECK(horizontal < 1000 + 70);
  CHECK(annotated > 1000 - 70);
  CHECK(annotated < 1000 + 70);
}

TEST_CASE("manifest records round-trip through JSON") {
  const auto cfg = small_config(5, 3);
  for (std::size_t i = 0; i < cfg.total; ++i) {
    const auto spec = sample_spec(cfg, i);
    ManifestRecord rec;
    rec.id = spec.id;
    rec.chart_type = spec.chart_type;
    rec.orientation = spec.orientation;
    rec.image_path = "images/" + spec.id + ".png";
    rec.ground_truth_text = serialize(ground_truth(spec));
    rec.spec = spec;
    const auto line = manifest_record_json(rec);
    const auto back = manifest_record_from_json(line);
    CHECK(back.id == rec.id);
    CHECK(back.chart_type == rec.chart_type);
    CHECK(back.ground_truth_text == rec.ground_truth_text);
    CHECK(back.spec.values == rec.spec.values);
    CHECK(manifest_record_json(back) == line);
  }
}

TEST_CASE("generate_dataset writes artifacts and reruns byte-identically") {
  TempDir dir("gen");
  auto cfg = small_config(12, 77);
  const auto summary = generate_dataset(cfg, dir.path, 2, /*render_images=*/true);
  CHECK_FALSE(summary.up_to_date);
  CHECK(summary.total == 12);
  CHECK(summary.counts_by_type == type_counts(cfg));
  const auto manifest = load_manifest(dir.path / "manifest.jsonl");
  REQUIRE(manifest.size() == 12);
  for (const auto& rec : manifest) {
    CHECK(fs::exists(dir.path / rec.image_path));
    CHECK(fs::file_size(dir.path / rec.image_path) > 0);
    CHECK(slurp(dir.path / "tables" / (rec.id + ".txt")) == rec.ground_truth_text);
    // stored text parses strictly back to the generated table
    CHECK(parse_linearized(rec.ground_truth_text, ParseMode::Strict) ==
          ground_truth(rec.spec));
  }
  const auto bytes = slurp(dir.path / "manifest.jsonl");
  const auto again = generate_dataset(cfg, dir.path, 2, /*render_images=*/false);
  CHECK(again.up_to_date);
  CHECK(slurp(dir.path / "manifest.jsonl") == bytes);
}

TEST_CASE("render log carries title, labels, legend and annotations") {
  TempDir dir("render");
  auto cfg = small_config(60, 5);
  cfg.annotate_probability = 1.0;
  bool saw_multi = false, saw_simple = false;
  for (std::size_t i = 0; i < cfg.total && !(saw_multi && saw_simple); ++i) {
    auto spec = sample_spec(cfg, i);
    spec.annotate = true;
    RenderLog log;
    render_chart(spec, dir.path / (spec.id + ".png"), {}, &log);
    CHECK(log.contains(spec.title));
    for (const auto& c : spec.categories) CHECK(log.contains(c));
    for (const auto& row : spec.values)
      for (double v : row) CHECK(log.contains(format_value(v)));
    if (spec.series_names.size() > 1) {
      for (const auto& s : spec.series_names) CHECK(log.contains(s));
      saw_multi = true;
    } else {
      saw_simple = true;
    }
    CHECK(fs::exists(dir.path / (spec.id + ".png")));
  }
  CHECK(saw_multi);
  CHECK(saw_simple);
}

TEST_CASE("render rejects non-finite values") {
  TempDir dir("badrender");
  auto spec = sample_spec(small_config(1, 1), 0);
  spec.values[0][0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(render_chart(spec, dir.path / "x.png"), RenderError);
}

TEST_CASE("config validation rejects bad mixes and delimiter collisions") {
  auto cfg = small_config(10, 0);
  CHECK_NOTHROW(validate(cfg));
  cfg.mix_simple = 0.9;  // no longer sums to 1
  CHECK_THROWS_AS(validate(cfg), InvalidConfig);
  cfg = small_config(10, 0);
  cfg.vocab.categories.push_back("Bad | Term");
  CHECK_THROWS_AS(validate(cfg), InvalidConfig);
  cfg = small_config(10, 0);
  cfg.min_categories = 9;
  cfg.max_categories = 4;
  CHECK_THROWS_AS(validate(cfg), InvalidConfig);
}

TEST_CASE("load_generator_config reads presets and rejects unknown keys") {
  TempDir dir("cfg");
  {
    std::ofstream out(dir.path / "ok.json");
    out << R"({"total": 25, "master_seed": 9, "mix": {"simple": 0.6, "stacked": 0.2, "grouped": 0.2}})";
  }
  const auto cfg = load_generator_config(dir.path / "ok.json");
  CHECK(cfg.total == 25);
  CHECK(cfg.master_seed == 9);
  CHECK(cfg.mix_simple == 0.6);
  {
    std::ofstream out(dir.path / "bad.json");
    out << R"({"total": 25, "no_such_key": 1})";
  }
  CHECK_THROWS_AS(load_generator_config(dir.path / "bad.json"), InvalidConfig);
}

TEST_CASE("vocabulary is swappable for other domains") {
  auto cfg = small_config(10, 4);
  cfg.vocab.titles = {"Patient Intake Volume"};
  cfg.vocab.x_labels = {"Ward"};
  cfg.vocab.y_labels = {"Admissions"};
  cfg.vocab.categories = {"ICU", "ER", "Oncology", "Pediatrics", "Cardiology",
                          "Neurology", "Radiology"};
  cfg.vocab.series_names = {"Mercy General", "St. Jude", "County Hospital",
                            "Riverside Clinic", "Hope Medical"};
  validate(cfg);
  for (std::size_t i = 0; i < cfg.total; ++i) {
    const auto spec = sample_spec(cfg, i);
    CHECK(spec.title == "Patient Intake Volume");
    for (const auto& c : spec.categories)
      CHECK(std::find(cfg.vocab.categories.begin(), cfg.vocab.categories.end(), c) !=
            cfg.vocab.categories.end());
  }
}
