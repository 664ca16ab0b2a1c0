#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "charteval/metrics.hpp"
#include "charteval/table.hpp"

using namespace charteval;

namespace {

// Brute-force minimum assignment cost over all injective matchings of
// size min(n, m) on an n x m cost matrix. Exponential; keep sides <= 6.
double brute_min_cost(const std::vector<double>& cost, std::size_t n, std::size_t m) {
  const bool rows_small = n <= m;
  const std::size_t small = rows_small ? n : m;
  const std::size_t large = rows_small ? m : n;
  std::vector<std::size_t> idx(large);
  std::iota(idx.begin(), idx.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  std::sort(idx.begin(), idx.end());
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < small; ++i) {
      const std::size_t r = rows_small ? i : idx[i];
      const std::size_t c = rows_small ? idx[i] : i;
      total += cost[r * m + c];
    }
    best = std::min(best, total);
  } while (std::next_permutation(idx.begin(), idx.end()));
  return best;
}

double brute_rnss(const std::vector<double>& p, const std::vector<double>& t) {
  if (p.empty() && t.empty()) return 1.0;
  if (p.empty() || t.empty()) return 0.0;
  std::vector<double> cost(p.size() * t.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < t.size(); ++j)
      cost[i * t.size() + j] = relative_distance(p[i], t[j]);
  return 1.0 - brute_min_cost(cost, p.size(), t.size()) /
                   static_cast<double>(std::max(p.size(), t.size()));
}

Entry entry(std::string r, std::string c, double v) {
  return Entry{std::move(r), std::move(c), CellValue::from_number(v)};
}

EntrySet set_of(std::vector<Entry> entries) { return EntrySet{std::move(entries)}; }

// Max similarity sum over injective matchings, i.e. the dual of the
// min-cost problem on 1 - sim.
double brute_sim_sum(const EntrySet& p, const EntrySet& t, const MetricConfig& cfg) {
  if (p.entries.empty() || t.entries.empty()) return 0.0;
  std::vector<double> cost(p.entries.size() * t.entries.size());
  for (std::size_t i = 0; i < p.entries.size(); ++i)
    for (std::size_t j = 0; j < t.entries.size(); ++j)
      cost[i * t.entries.size() + j] = 1.0 - entry_similarity(p.entries[i], t.entries[j], cfg);
  const double min_cost = brute_min_cost(cost, p.entries.size(), t.entries.size());
  return static_cast<double>(std::min(p.entries.size(), t.entries.size())) - min_cost;
}

}  // namespace

TEST_CASE("relative_distance basics") {
  CHECK(relative_distance(100, 100) == 0.0);
  CHECK(relative_distance(110, 100) == doctest::Approx(0.1));
  CHECK(relative_distance(300, 100) == 1.0);  // clamped at 1
  CHECK(relative_distance(0, 0) == 0.0);
  CHECK(relative_distance(5, 0) == 1.0);
  CHECK(relative_distance(-90, -100) == doctest::Approx(0.1));
  // theta cutoff: distances above theta get no partial credit
  CHECK(relative_distance(150, 100, 0.4) == 1.0);
  CHECK(relative_distance(130, 100, 0.4) == doctest::Approx(0.3));
}

TEST_CASE("levenshtein against known values") {
  CHECK(levenshtein("kitten", "sitting") == 3);
  CHECK(levenshtein("", "") == 0);
  CHECK(levenshtein("abc", "") == 3);
  CHECK(levenshtein("flaw", "lawn") == 2);
  // multibyte characters count as single symbols
  CHECK(levenshtein("caf\xc3\xa9", "cafe") == 1);
  CHECK(levenshtein("caf\xc3\xa9", "caf\xc3\xa9") == 0);
}

TEST_CASE("normalized_levenshtein with tau cutoff") {
  CHECK(normalized_levenshtein("", "") == 0.0);
  CHECK(normalized_levenshtein("abcd", "abce") == doctest::Approx(0.25));
  CHECK(normalized_levenshtein("abcd", "wxyz") == 1.0);
  // tau = 0.5: a 3/4 distance is clamped to 1
  CHECK(normalized_levenshtein("abcd", "axyz", 0.5) == 1.0);
  CHECK(normalized_levenshtein("abcd", "abxy", 0.5) == doctest::Approx(0.5));
}

TEST_CASE("assignment equals exhaustive enumeration on random matrices") {
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> dim(1, 5);
  for (int iter = 0; iter < 300; ++iter) {
    const std::size_t n = dim(gen), m = dim(gen);
    std::vector<double> cost(n * m);
    for (auto& c : cost) c = u(gen);
    const auto a = min_cost_assignment(cost, n, m);
    CHECK(a.pairs.size() == std::min(n, m));
    double total = 0.0;
    for (const auto& [i, j] : a.pairs) total += cost[i * m + j];
    CHECK(a.total_cost == doctest::Approx(total).epsilon(1e-12));
    CHECK(a.total_cost == doctest::Approx(brute_min_cost(cost, n, m)).epsilon(1e-9));
  }
}

TEST_CASE("rnss hand-computed values") {
  CHECK(rnss({{100, 200}}, {{110, 190}}).value == doctest::Approx(0.9282296650717703));
  CHECK(rnss({{5}}, {{5}}).value == 1.0);
  // only matched pairs enter the sum; the max(N, M) denominator is the
  // only penalty for cardinality mismatch, so a zero-cost match wins
  CHECK(rnss({{5, 7}}, {{5}}).value == 1.0);
  CHECK(rnss({{6, 7}}, {{5}}).value == doctest::Approx(1.0 - (1.0 / 5.0) / 2.0));
  CHECK(rnss({}, {}).value == 1.0);
  CHECK(rnss({{1}}, {}).value == 0.0);
  CHECK(rnss({}, {{1}}).value == 0.0);
  // zero targets give all-or-nothing credit
  CHECK(rnss({{0}}, {{0}}).value == 1.0);
  CHECK(rnss({{3}}, {{0}}).value == 0.0);
}

TEST_CASE("rnss threshold mode forgives <= 10% deviations") {
  RnssOptions opts;
  opts.threshold_mode = true;
  CHECK(rnss({{110}}, {{100}}, opts).value == 1.0);
  CHECK(rnss({{111}}, {{100}}, opts).value == doctest::Approx(1.0 - 0.11));
}

TEST_CASE("rnss equals exhaustive enumeration on random sets") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  std::uniform_int_distribution<std::size_t> dim(0, 5);
  for (int iter = 0; iter < 300; ++iter) {
    std::vector<double> p(dim(gen)), t(dim(gen));
    for (auto& x : p) x = u(gen);
    for (auto& x : t) x = u(gen);
    CHECK(rnss({p}, {t}).value == doctest::Approx(brute_rnss(p, t)).epsilon(1e-9));
  }
}

TEST_CASE("rms hand-computed values") {
  MetricConfig cfg;
  SUBCASE("identical single entries") {
    const auto s = rms(set_of({entry("Billing", "Sales", 100)}),
                       set_of({entry("Billing", "Sales", 100)}), cfg);
    CHECK(s.precision == 1.0);
    CHECK(s.recall == 1.0);
    CHECK(s.f1 == 1.0);
  }
  SUBCASE("half numeric credit") {
    const auto s = rms(set_of({entry("Billing", "Sales", 50)}),
                       set_of({entry("Billing", "Sales", 100)}), cfg);
    CHECK(s.precision == doctest::Approx(0.5));
    CHECK(s.recall == doctest::Approx(0.5));
    CHECK(s.f1 == doctest::Approx(0.5));
  }
  SUBCASE("missing target entry costs recall") {
    const auto s = rms(set_of({entry("Billing", "Sales", 100)}),
                       set_of({entry("Billing", "Sales", 100), entry("Equity", "Sales", 40)}),
                       cfg);
    CHECK(s.precision == doctest::Approx(1.0));
    CHECK(s.recall == doctest::Approx(0.5));
    CHECK(s.f1 == doctest::Approx(2.0 / 3.0));
  }
  SUBCASE("degenerate sets") {
    const auto both = rms(set_of({}), set_of({}), cfg);
    CHECK(both.f1 == 1.0);
    const auto one = rms(set_of({entry("A", "B", 1)}), set_of({}), cfg);
    CHECK(one.f1 == 0.0);
    CHECK(one.precision == 0.0);
    CHECK(one.recall == 0.0);
  }
}

TEST_CASE("rms tau gates textual credit") {
  MetricConfig cfg;
  cfg.transposition_search = false;
  // keys differ in 3 of 13 symbols -> NL ~ 0.23 < tau 0.5, partial credit
  const auto close = rms(set_of({entry("Billing", "Sales", 100)}),
                         set_of({entry("Billing", "Salxx", 100)}), cfg);
  CHECK(close.f1 > 0.7);
  // disjoint keys -> NL 1.0 -> zero similarity
  const auto far = rms(set_of({entry("Billing", "Sales", 100)}),
                       set_of({entry("Zzzzzzz", "Qqqqq", 100)}), cfg);
  CHECK(far.f1 == 0.0);
}

TEST_CASE("rms matches exhaustive similarity maximization on random pairs") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(1.0, 100.0);
  std::uniform_int_distribution<std::size_t> dim(1, 5);
  std::uniform_int_distribution<int> ch('a', 'e');
  MetricConfig cfg;
  cfg.transposition_search = false;
  auto rand_key = [&] {
    std::string s;
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>(ch(gen)));
    return s;
  };
  for (int iter = 0; iter < 200; ++iter) {
    EntrySet p, t;
    const std::size_t n = dim(gen), m = dim(gen);
    for (std::size_t i = 0; i < n; ++i) p.entries.push_back(entry(rand_key(), rand_key(), u(gen)));
    for (std::size_t j = 0; j < m; ++j) t.entries.push_back(entry(rand_key(), rand_key(), u(gen)));
    const auto s = rms(p, t, cfg);
    const double sim = brute_sim_sum(p, t, cfg);
    CHECK(s.precision == doctest::Approx(sim / static_cast<double>(n)).epsilon(1e-9));
    CHECK(s.recall == doctest::Approx(sim / static_cast<double>(m)).epsilon(1e-9));
    const double f1 = (s.precision + s.recall) > 0
                          ? 2 * s.precision * s.recall / (s.precision + s.recall)
                          : 0.0;
    CHECK(s.f1 == doctest::Approx(f1).epsilon(1e-12));
  }
}

TEST_CASE("scores are invariant under entry order") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(1.0, 100.0);
  MetricConfig cfg;
  EntrySet p, t;
  for (int i = 0; i < 6; ++i) {
    p.entries.push_back(entry("r" + std::to_string(i), "c", u(gen)));
    t.entries.push_back(entry("r" + std::to_string(i), "c", u(gen)));
  }
  const auto base = rms(p, t, cfg);
  auto shuffled = p;
  std::shuffle(shuffled.entries.begin(), shuffled.entries.end(), gen);
  const auto after = rms(shuffled, t, cfg);
  CHECK(std::abs(base.f1 - after.f1) <= 1e-12);
  CHECK(std::abs(base.precision - after.precision) <= 1e-12);

  NumberSet np{{3, 1, 4, 1, 5}}, nt{{2, 7, 1, 8}};
  const double r1 = rnss(np, nt).value;
  std::shuffle(np.values.begin(), np.values.end(), gen);
  CHECK(std::abs(rnss(np, nt).value - r1) <= 1e-12);
}

TEST_CASE("transposition search recovers transposed predictions") {
  MetricConfig cfg;  // transposition_search on by default
  EntrySet t;
  t.entries = {entry("Income", "Citibank", 647), entry("Income", "Mizuho Bank", 627),
               entry("Capital", "Citibank", 989), entry("Capital", "Mizuho Bank", 804)};
  const auto straight = rms(t, t, cfg);
  CHECK(straight.f1 == 1.0);
  const auto swapped = rms(transpose(t), t, cfg);
  CHECK(std::abs(swapped.f1 - 1.0) <= 1e-12);
  CHECK(swapped.transposed_used);

  MetricConfig off = cfg;
  off.transposition_search = false;
  CHECK(rms(transpose(t), t, off).f1 < 1.0);
}

TEST_CASE("decreasing tau or theta never increases rms scores") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(1.0, 100.0);
  std::uniform_int_distribution<int> ch('a', 'f');
  std::uniform_int_distribution<std::size_t> dim(1, 4);
  auto rand_key = [&] {
    std::string s;
    for (int i = 0; i < 3; ++i) s.push_back(static_cast<char>(ch(gen)));
    return s;
  };
  for (int iter = 0; iter < 200; ++iter) {
    EntrySet p, t;
    for (std::size_t i = 0, n = dim(gen); i < n; ++i)
      p.entries.push_back(entry(rand_key(), rand_key(), u(gen)));
    for (std::size_t j = 0, m = dim(gen); j < m; ++j)
      t.entries.push_back(entry(rand_key(), rand_key(), u(gen)));
    MetricConfig hi, lo;
    hi.tau = 0.8;
    hi.theta = 1.0;
    lo.tau = 0.4;
    lo.theta = 0.5;
    const auto sh = rms(p, t, hi);
    const auto sl = rms(p, t, lo);
    CHECK(sl.precision <= sh.precision + 1e-12);
    CHECK(sl.recall <= sh.recall + 1e-12);
    CHECK(sl.f1 <= sh.f1 + 1e-12);
  }
}

TEST_CASE("rnss is scale invariant") {
  NumberSet p{{12, -7, 31}}, t{{11, -8, 29}};
  const double base = rnss(p, t).value;
  for (double k : {2.0, 10.0, 0.5, -3.0}) {
    NumberSet ps{p}, ts{t};
    for (auto& x : ps.values) x *= k;
    for (auto& x : ts.values) x *= k;
    CHECK(rnss(ps, ts).value == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("case_insensitive flag folds key case") {
  MetricConfig cfg;
  cfg.case_insensitive = true;
  const auto s = rms(set_of({entry("BILLING", "SALES", 100)}),
                     set_of({entry("billing", "sales", 100)}), cfg);
  CHECK(s.f1 == 1.0);
}
