/* charteval — C API for the chart-to-table evaluation toolkit.
 *
 * Linearized tables ("|" column delimiter, "<0x0A>" row terminator)
 * are held behind opaque handles. All functions return CE_OK on
 * success; on failure ce_last_error() describes the problem for the
 * calling thread. Strings returned through char** are heap-allocated
 * and must be released with ce_string_free().
 */
#ifndef CHARTEVAL_H
#define CHARTEVAL_H

#include <stddef.h>

#if defined(_WIN32)
#define CE_API __declspec(dllexport)
#else
#define CE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ce_status {
  CE_OK = 0,
  CE_ERR_INVALID_ARGUMENT = 1,
  CE_ERR_PARSE = 2,
  CE_ERR_IO = 3,
  CE_ERR_ENDPOINT = 4,
  CE_ERR_INTERNAL = 5
} ce_status;

typedef struct ce_table ce_table; /* opaque linearized table */

typedef enum ce_parse_mode { CE_PARSE_STRICT = 0, CE_PARSE_LENIENT = 1 } ce_parse_mode;

typedef struct ce_metric_config {
  double tau;               /* text-distance credit cutoff, default 0.5 */
  double theta;             /* numeric-distance credit cutoff, default 1.0 */
  int case_insensitive;     /* default 0 */
  int transposition_search; /* default 1 */
} ce_metric_config;

typedef struct ce_rms_result {
  double precision;
  double recall;
  double f1;
  int transposed_used;
} ce_rms_result;

/* Last error message for the calling thread; empty string if none. */
CE_API const char* ce_last_error(void);
CE_API void ce_string_free(char* s);

CE_API ce_status ce_table_parse(const char* text, ce_parse_mode mode, ce_table** out);
CE_API char* ce_table_serialize(const ce_table* table);
CE_API void ce_table_free(ce_table* table);
CE_API size_t ce_table_entry_count(const ce_table* table);
CE_API ce_status ce_table_transpose(const ce_table* table, ce_table** out);

CE_API ce_metric_config ce_metric_config_default(void);

/* Relative Number Set Similarity of the two tables' numeric cells. */
CE_API ce_status ce_rnss(const ce_table* pred, const ce_table* target, double* out);
/* Relative Mapping Similarity precision/recall/F1 over entry triples. */
CE_API ce_status ce_rms(const ce_table* pred, const ce_table* target,
                        const ce_metric_config* config, ce_rms_result* out);

/* QA error metrics over paired ground truth / prediction arrays.
 * ce_mape excludes zero-truth pairs and fails if none remain. */
CE_API ce_status ce_mape(const double* truth, const double* pred, size_t n, double* out);
CE_API ce_status ce_rmse(const double* truth, const double* pred, size_t n, double* out);
/* rho = (mape_1 - mape_2) / mape_1 * 100; fails when mape_1 is 0. */
CE_API ce_status ce_relative_improvement(double mape_1, double mape_2, double* out);
CE_API double ce_config_delta(double metric_c1, double metric_c2);

/* Batch operations. Each takes/returns JSON so the surface stays
 * stable; see the README for the schemas. *out_json receives a
 * ce_string_free()-able buffer. */

/* config_json: generator config (file path). Writes images/, tables/
 * and manifest.jsonl under out_dir. */
CE_API ce_status ce_generate_dataset(const char* config_json_path, const char* out_dir,
                                     size_t jobs, int render_images, char** out_summary_json);

/* Scores a JSONL prediction bundle ({"id","table_text"} per line)
 * against the manifest's ground truths. options_json (optional, may be
 * NULL): {"tau","theta","case_insensitive","transposition_search",
 * "missing_as_empty","jobs"}. */
CE_API ce_status ce_eval_table(const char* manifest_path, const char* predictions_path,
                               const char* options_json, char** out_report_json);

/* Generates deterministic template QA pairs over a manifest's ground
 * truths. options_json (optional): {"per_chart","seed"}. Writes a
 * JSONL QA file. */
CE_API ce_status ce_generate_qa(const char* manifest_path, const char* options_json,
                                const char* out_qa_path, char** out_summary_json);

/* Runs one QA evaluation configuration. options_json:
 * {"configuration":"image_only"|"image_plus_base_table"|
 *  "image_plus_finetuned_table",
 *  "client":"oracle"|"perturb"|"refuse"|"http",
 *  "perturb_percent":10.0, "table_source":"preds.jsonl",
 *  "endpoint_url":..., "model":..., "auth_token_env":...,
 *  "chat_completions":false, "jobs":4, "retries":2, "backoff_ms":250,
 *  "timeout_seconds":60, "log_path":"records.jsonl"} */
CE_API ce_status ce_eval_qa(const char* manifest_path, const char* qa_path,
                            const char* options_json, char** out_report_json);

/* Pairwise delta/rho comparisons across QA report JSON files. */
CE_API ce_status ce_compare_reports(const char* const* report_paths, size_t n_reports,
                                    char** out_json);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* CHARTEVAL_H */
