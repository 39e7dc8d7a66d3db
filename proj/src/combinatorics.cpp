#include "elastic/combinatorics.hpp"

#include "elastic/errors.hpp"

namespace elastic {

BinomialTable::BinomialTable(std::int64_t n, std::int64_t k)
    : k_(k), table_(static_cast<std::size_t>((n + 1) * (k + 1)), 0) {
  for (std::int64_t i = 0; i <= n; ++i) {
    table_[static_cast<std::size_t>(i * (k + 1))] = 1;
    for (std::int64_t j = 1; j <= std::min(i, k); ++j) {
      auto a = table_[static_cast<std::size_t>((i - 1) * (k + 1) + j - 1)];
      auto b = table_[static_cast<std::size_t>((i - 1) * (k + 1) + j)];
      if (a > INT64_MAX - b) throw DomainError("binomial table overflow");
      table_[static_cast<std::size_t>(i * (k + 1) + j)] = a + b;
    }
  }
}

}  // namespace elastic
