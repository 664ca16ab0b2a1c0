#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "charteval/table.hpp"

namespace charteval {

struct MetricConfig {
  double tau = 0.5;    // text-distance credit cutoff
  double theta = 1.0;  // numeric-distance credit cutoff
  bool case_insensitive = false;
  bool transposition_search = true;
};

/// A matching between prediction indices and target indices,
/// |pairs| = min(N, M).
struct Assignment {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  double total_cost = 0.0;
};

struct RnssScore {
  double value = 0.0;
  Assignment assignment;
};

struct RmsScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  Assignment assignment;
  bool transposed_used = false;
};

/// min(1, |p - t| / |t|); 0 when p = t = 0, 1 when t = 0 and p != t.
/// Distances above theta are clamped to 1 (no partial credit).
double relative_distance(double p, double t, double theta = 1.0);

/// Classic unit-cost edit distance over Unicode scalar values.
std::size_t levenshtein(const std::string& a, const std::string& b);

/// levenshtein / max(|a|, |b|), 0 for two empty strings; values above
/// tau are clamped to 1.
double normalized_levenshtein(const std::string& a, const std::string& b, double tau = 1.0);

/// (1 - NL_tau(row_key col_key)) * (1 - value distance), in [0, 1].
double entry_similarity(const Entry& p, const Entry& t, const MetricConfig& cfg);

/// Minimum-cost matching of size min(N, M) on a rectangular cost
/// matrix (row-major, N x M). All costs must be finite and >= 0.
Assignment min_cost_assignment(const std::vector<double>& cost, std::size_t n, std::size_t m);

struct RnssOptions {
  /// Zero out distances <= 0.10 before matching (the narrated +-10%
  /// correctness threshold); off by default, the equation is continuous.
  bool threshold_mode = false;
};

RnssScore rnss(const NumberSet& pred, const NumberSet& target, const RnssOptions& opts = {});

RmsScore rms(const EntrySet& pred, const EntrySet& target, const MetricConfig& cfg = {});

}  // namespace charteval
