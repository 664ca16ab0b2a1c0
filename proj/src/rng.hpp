#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

namespace charteval::detail {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Small deterministic generator; avoids the implementation-defined
/// behavior of the standard distributions so that corpora and QA pairs
/// are reproducible bit-for-bit across platforms.
class Rng {
public:
  explicit Rng(uint64_t seed) : state_(splitmix64(seed ^ 0x6a09e667f3bcc908ULL)) {}

  uint64_t next() {
    state_ = splitmix64(state_);
    return state_;
  }

  // [0, 1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // inclusive bounds
  int64_t uniform_int(int64_t lo, int64_t hi) {
    const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int64_t>(next() % span);
  }

  std::size_t index(std::size_t size) {
    return static_cast<std::size_t>(uniform_int(0, static_cast<int64_t>(size) - 1));
  }

  double uniform_real(double lo, double hi) { return lo + uniform() * (hi - lo); }

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[static_cast<std::size_t>(uniform_int(0, static_cast<int64_t>(i) - 1))]);
    }
  }

  std::vector<std::string> pick_distinct(const std::vector<std::string>& pool, std::size_t k) {
    std::vector<std::size_t> idx(pool.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<std::string> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k && i < idx.size(); ++i) {
      const auto j = static_cast<std::size_t>(
          uniform_int(static_cast<int64_t>(i), static_cast<int64_t>(idx.size()) - 1));
      std::swap(idx[i], idx[j]);
      out.push_back(pool[idx[i]]);
    }
    return out;
  }

private:
  uint64_t state_;
};

}  // namespace charteval::detail
