#include "charteval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace charteval {

namespace {

std::vector<uint32_t> decode_utf8(const std::string& s) {
  std::vector<uint32_t> cps;
  cps.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    unsigned char c = s[i];
    uint32_t cp = c;
    std::size_t extra = 0;
    if (c >= 0xF0) {
      cp = c & 0x07;
      extra = 3;
    } else if (c >= 0xE0) {
      cp = c & 0x0F;
      extra = 2;
    } else if (c >= 0xC0) {
      cp = c & 0x1F;
      extra = 1;
    }
    ++i;
    for (std::size_t k = 0; k < extra && i < s.size(); ++k, ++i) {
      cp = (cp << 6) | (s[i] & 0x3F);
    }
    cps.push_back(cp);
  }
  return cps;
}

std::string ascii_lower(std::string s) {
  for (char& c : s) {
    if (c >= 'A' && c <= 'Z') c += 'a' - 'A';
  }
  return s;
}

double value_distance(const CellValue& p, const CellValue& t, const MetricConfig& cfg) {
  if (p.number && t.number) return relative_distance(*p.number, *t.number, cfg.theta);
  std::string a = p.raw, b = t.raw;
  if (cfg.case_insensitive) {
    a = ascii_lower(std::move(a));
    b = ascii_lower(std::move(b));
  }
  return normalized_levenshtein(a, b, cfg.tau);
}

RmsScore rms_single(const EntrySet& pred, const EntrySet& target, const MetricConfig& cfg) {
  const std::size_t n = pred.entries.size();
  const std::size_t m = target.entries.size();
  RmsScore score;
  if (n == 0 && m == 0) {
    score.precision = score.recall = score.f1 = 1.0;
    return score;
  }
  if (n == 0 || m == 0) return score;

  std::vector<double> cost(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      cost[i * m + j] = 1.0 - entry_similarity(pred.entries[i], target.entries[j], cfg);
    }
  }
  score.assignment = min_cost_assignment(cost, n, m);
  double matched = 0.0;
  for (const auto& [i, j] : score.assignment.pairs) matched += 1.0 - cost[i * m + j];
  score.precision = matched / static_cast<double>(n);
  score.recall = matched / static_cast<double>(m);
  if (score.precision + score.recall > 0) {
    score.f1 = 2.0 * score.precision * score.recall / (score.precision + score.recall);
  }
  return score;
}

}  // namespace

double relative_distance(double p, double t, double theta) {
  double d;
  if (t == 0.0) {
    d = (p == 0.0) ? 0.0 : 1.0;
  } else {
    d = std::min(1.0, std::abs(p - t) / std::abs(t));
  }
  return d > theta ? 1.0 : d;
}

std::size_t levenshtein(const std::string& a, const std::string& b) {
  const auto ca = decode_utf8(a);
  const auto cb = decode_utf8(b);
  const std::size_t n = ca.size(), m = cb.size();
  if (n == 0) return m;
  if (m == 0) return n;

  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t sub = prev[j - 1] + (ca[i - 1] == cb[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double normalized_levenshtein(const std::string& a, const std::string& b, double tau) {
  const std::size_t la = decode_utf8(a).size();
  const std::size_t lb = decode_utf8(b).size();
  const std::size_t longest = std::max(la, lb);
  if (longest == 0) return 0.0;
  const double nl = static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
  return nl > tau ? 1.0 : nl;
}

double entry_similarity(const Entry& p, const Entry& t, const MetricConfig& cfg) {
  std::string pk = p.row_key + " " + p.col_key;
  std::string tk = t.row_key + " " + t.col_key;
  if (cfg.case_insensitive) {
    pk = ascii_lower(std::move(pk));
    tk = ascii_lower(std::move(tk));
  }
  const double key_factor = 1.0 - normalized_levenshtein(pk, tk, cfg.tau);
  const double val_factor = 1.0 - value_distance(p.value, t.value, cfg);
  return key_factor * val_factor;
}

Assignment min_cost_assignment(const std::vector<double>& cost, std::size_t n, std::size_t m) {
  Assignment result;
  if (n == 0 || m == 0) return result;

  // Jonker-Volgenant shortest augmenting path on the matrix padded to
  // square with zero-cost dummy rows/columns.
  const std::size_t dim = std::max(n, m);
  auto at = [&](std::size_t i, std::size_t j) -> double {
    return (i < n && j < m) ? cost[i * m + j] : 0.0;
  };

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(dim + 1, 0.0), v(dim + 1, 0.0);
  std::vector<std::size_t> match(dim + 1, 0), way(dim + 1, 0);

  for (std::size_t i = 1; i <= dim; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(dim + 1, inf);
    std::vector<bool> used(dim + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= dim; ++j) {
        if (used[j]) continue;
        const double cur = at(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= dim; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  for (std::size_t j = 1; j <= dim; ++j) {
    const std::size_t i = match[j] - 1;
    if (i < n && j - 1 < m) {
      result.pairs.emplace_back(i, j - 1);
      result.total_cost += cost[i * m + (j - 1)];
    }
  }
  std::sort(result.pairs.begin(), result.pairs.end());
  return result;
}

RnssScore rnss(const NumberSet& pred, const NumberSet& target, const RnssOptions& opts) {
  const std::size_t n = pred.values.size();
  const std::size_t m = target.values.size();
  RnssScore score;
  if (n == 0 && m == 0) {
    score.value = 1.0;
    return score;
  }
  if (n == 0 || m == 0) {
    score.value = 0.0;
    return score;
  }

  std::vector<double> cost(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double d = relative_distance(pred.values[i], target.values[j]);
      if (opts.threshold_mode && d <= 0.10) d = 0.0;
      cost[i * m + j] = d;
    }
  }
  score.assignment = min_cost_assignment(cost, n, m);
  score.value = 1.0 - score.assignment.total_cost / static_cast<double>(std::max(n, m));
  return score;
}

RmsScore rms(const EntrySet& pred, const EntrySet& target, const MetricConfig& cfg) {
  RmsScore best = rms_single(pred, target, cfg);
  if (cfg.transposition_search) {
    RmsScore alt = rms_single(transpose(pred), target, cfg);
    if (alt.f1 > best.f1) {
      alt.transposed_used = true;
      return alt;
    }
  }
  return best;
}

}  // namespace charteval
