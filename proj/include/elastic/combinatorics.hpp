#ifndef ELASTIC_COMBINATORICS_HPP
#define ELASTIC_COMBINATORICS_HPP

#include <cstdint>
#include <span>
#include <vector>

namespace elastic {

/// Advances a strictly increasing k-subset of {0..n-1} to its colex
/// successor. Returns false after the last subset.
inline bool next_subset(std::vector<std::int64_t>& idx, std::int64_t n) {
  const auto k = idx.size();
  for (std::size_t i = 0; i < k; ++i) {
    auto limit = (i + 1 < k) ? idx[i + 1] : n;
    if (idx[i] + 1 < limit) {
      ++idx[i];
      for (std::size_t j = 0; j < i; ++j) idx[j] = static_cast<std::int64_t>(j);
      return true;
    }
  }
  return false;
}

/// Calls fn(subset) for every k-subset of {0..n-1} in colex order.
template <typename Fn>
void for_each_subset(std::int64_t n, std::int64_t k, Fn&& fn) {
  if (k < 0 || k > n) return;
  std::vector<std::int64_t> idx(static_cast<std::size_t>(k));
  for (std::int64_t i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  do {
    fn(std::span<const std::int64_t>(idx));
  } while (k > 0 && next_subset(idx, n));
}

/// Calls fn(tuple) for every element of {0..base-1}^len, last entry fastest.
template <typename Fn>
void for_each_tuple(std::int64_t base, std::size_t len, Fn&& fn) {
  std::vector<std::int64_t> t(len, 0);
  while (true) {
    fn(std::span<const std::int64_t>(t));
    std::size_t pos = len;
    while (pos > 0) {
      --pos;
      if (++t[pos] < base) break;
      t[pos] = 0;
      if (pos == 0) return;
    }
    if (len == 0) return;
  }
}

/// Pascal table C(i, j) for 0 <= j <= k, 0 <= i <= n.
class BinomialTable {
 public:
  BinomialTable(std::int64_t n, std::int64_t k);
  std::int64_t operator()(std::int64_t i, std::int64_t j) const {
    if (j < 0 || j > k_ || i < j) return 0;
    return table_[static_cast<std::size_t>(i * (k_ + 1) + j)];
  }

 private:
  std::int64_t k_;
  std::vector<std::int64_t> table_;
};

/// Colex rank of a strictly increasing subset: sum_k C(v_k, k+1).
inline std::int64_t colex_rank(std::span<const std::int64_t> sorted, const BinomialTable& binom) {
  std::int64_t r = 0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    r += binom(sorted[k], static_cast<std::int64_t>(k) + 1);
  }
  return r;
}

}  // namespace elastic

#endif  // ELASTIC_COMBINATORICS_HPP
