#include "elastic/exact.hpp"

#include <array>
#include <bit>

#include <omp.h>
#include <fmt/format.h>

#include "elastic/combinatorics.hpp"
#include "elastic/errors.hpp"

namespace elastic {

Mode parse_mode(const std::string& name) {
  if (name == "float") return Mode::float_mode;
  if (name == "rational") return Mode::rational;
  throw DomainError("unknown mode '" + name + "' (expected float or rational)");
}

std::string to_string(Mode mode) { return mode == Mode::rational ? "rational" : "float"; }

double log_tiling_count(std::int64_t N, int n) {
  if (n < 1 || N % n != 0) throw DomainError(fmt::format("tile size {} does not divide N = {}", n, N));
  const auto blocks = N / n;
  return log_factorial(N) - log_factorial(blocks) - static_cast<double>(blocks) * log_factorial(n);
}

namespace {

constexpr std::int64_t kMaxSubsetTable = 50'000'000;

void check_table_size(std::int64_t N, int n) {
  if (N > 64) throw DomainError("exact enumeration supports at most 64 vertices");
  if (n < 1 || N % n != 0) throw DomainError(fmt::format("tile size {} does not divide N = {}", n, N));
  if (log_binomial(N, n) > std::log(static_cast<double>(kMaxSubsetTable))) {
    throw DomainError("too many placements to tabulate");
  }
}

// Recursion shared by the float and rational enumerators. Value is double or
// Rational; Weights maps a colex rank to a Value.
template <typename Value, typename Weights>
class TilingRecursion {
 public:
  TilingRecursion(std::int64_t N, int n, Weights weights)
      : N_(N), n_(n), binom_(N, n), weights_(std::move(weights)),
        full_(N == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << N) - 1) {}

  Value sum(std::uint64_t mask) const {
    if (mask == full_) return Value(1);
    Value acc(0);
    for_each_child(mask, [&](std::uint64_t child, const Value& w) { acc += w * sum(child); });
    return acc;
  }

  /// Calls fn(child_mask, block_weight) for every way to complete the block
  /// of the lowest uncovered vertex.
  template <typename Fn>
  void for_each_child(std::uint64_t mask, Fn&& fn) const {
    const auto lowest = static_cast<std::int64_t>(std::countr_zero(~mask));
    std::array<std::int64_t, 64> free{};
    std::int64_t m = 0;
    for (auto u = lowest + 1; u < N_; ++u) {
      if (!((mask >> u) & 1U)) free[static_cast<std::size_t>(m++)] = u;
    }
    const auto k = static_cast<std::size_t>(n_ - 1);
    std::array<std::int64_t, 64> idx{};
    std::array<std::int64_t, 64> block{};
    for (std::size_t i = 0; i < k; ++i) idx[i] = static_cast<std::int64_t>(i);
    block[0] = lowest;
    while (true) {
      std::uint64_t bits = std::uint64_t{1} << lowest;
      for (std::size_t i = 0; i < k; ++i) {
        block[i + 1] = free[static_cast<std::size_t>(idx[i])];
        bits |= std::uint64_t{1} << block[i + 1];
      }
      auto rank = colex_rank(std::span<const std::int64_t>(block.data(), k + 1), binom_);
      fn(mask | bits, weights_(rank));
      // colex successor of idx over {0..m-1}
      std::size_t i = 0;
      for (; i < k; ++i) {
        auto limit = (i + 1 < k) ? idx[i + 1] : m;
        if (idx[i] + 1 < limit) {
          ++idx[i];
          for (std::size_t j = 0; j < i; ++j) idx[j] = static_cast<std::int64_t>(j);
          break;
        }
      }
      if (i == k) return;
    }
  }

  std::uint64_t full() const { return full_; }

 private:
  std::int64_t N_;
  int n_;
  BinomialTable binom_;
  Weights weights_;
  std::uint64_t full_;
};

auto float_recursion(const SubsetTable& t) {
  auto weights = [&t](std::int64_t r) { return t.scaled[static_cast<std::size_t>(r)]; };
  return TilingRecursion<double, decltype(weights)>(t.N, t.n, weights);
}

double unscale(const SubsetTable& t, double scaled_sum) {
  return std::log(scaled_sum) + static_cast<double>(t.N / t.n) * t.log_ref;
}

}  // namespace

SubsetTable SubsetTable::build(std::int64_t N, int n, const std::function<double(std::span<const Vertex>)>& log_f) {
  check_table_size(N, n);
  SubsetTable t;
  t.N = N;
  t.n = n;
  std::vector<double> logs;
  logs.reserve(static_cast<std::size_t>(binomial(N, n)));
  for_each_subset(N, n, [&](std::span<const std::int64_t> s) {
    double v = log_f(s);
    if (!std::isfinite(v)) throw DomainError("non-positive activity on a placement");
    logs.push_back(v);
  });
  CompensatedSum mean;
  for (double v : logs) mean += v;
  t.log_ref = mean.value() / static_cast<double>(logs.size());
  t.scaled.resize(logs.size());
  for (std::size_t i = 0; i < logs.size(); ++i) t.scaled[i] = std::exp(logs[i] - t.log_ref);
  return t;
}

SubsetTable SubsetTable::build_exact(std::int64_t N, int n,
                                     const std::function<Rational(std::span<const Vertex>)>& f) {
  check_table_size(N, n);
  SubsetTable t;
  t.N = N;
  t.n = n;
  for_each_subset(N, n, [&](std::span<const std::int64_t> s) {
    Rational q = f(s);
    if (q <= 0) throw DomainError("non-positive activity on a placement");
    t.exact.push_back(q);
    t.scaled.push_back(q.convert_to<double>());
  });
  return t;
}

double enumerate_tilings_serial(const SubsetTable& table) {
  auto rec = float_recursion(table);
  return unscale(table, rec.sum(0));
}

double enumerate_tilings_parallel(const SubsetTable& table) {
  auto rec = float_recursion(table);
  struct Task {
    std::uint64_t mask;
    double prefix;
  };
  // Expand the top of the recursion breadth-first until there is enough
  // independent work; the task list order is fixed by the expansion.
  const std::size_t target = 64 * static_cast<std::size_t>(std::max(1, omp_get_max_threads()));
  std::vector<Task> tasks{{0, 1.0}};
  while (tasks.size() < target) {
    if (tasks.front().mask == rec.full()) break;
    std::vector<Task> next;
    for (const auto& task : tasks) {
      rec.for_each_child(task.mask, [&](std::uint64_t child, double w) { next.push_back({child, task.prefix * w}); });
    }
    tasks = std::move(next);
  }
  std::vector<double> results(tasks.size());
  const auto count = static_cast<std::int64_t>(tasks.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < count; ++i) {
    const auto& task = tasks[static_cast<std::size_t>(i)];
    results[static_cast<std::size_t>(i)] = task.prefix * rec.sum(task.mask);
  }
  CompensatedSum total;
  for (double r : results) total += r;
  return unscale(table, total.value());
}

Rational enumerate_tilings_exact(const SubsetTable& table) {
  if (table.exact.empty()) throw DomainError("subset table carries no exact values");
  auto weights = [&table](std::int64_t r) -> const Rational& { return table.exact[static_cast<std::size_t>(r)]; };
  TilingRecursion<Rational, decltype(weights)> rec(table.N, table.n, weights);
  return rec.sum(0);
}

PartitionResult exact_partition(const SubsetTable& table, const ExactOptions& opts) {
  const double log_count = log_tiling_count(table.N, table.n);
  if (log_count > std::log(opts.budget)) {
    throw BudgetExceeded(fmt::format("exact enumeration needs ~10^{:.2f} tilings, budget is {:g}",
                                     log_count / std::log(10.0), opts.budget),
                         log_count / std::log(10.0));
  }
  PartitionResult out;
  out.N = table.N;
  out.n = table.n;
  out.mode = opts.mode;
  if (opts.mode == Mode::rational) {
    if (table.N > kRationalMaxVertices) {
      throw DomainError(fmt::format("rational mode is limited to N <= {}", kRationalMaxVertices));
    }
    Rational z = enumerate_tilings_exact(table);
    out.log_Z = std::log(numerator(z).convert_to<double>()) - std::log(denominator(z).convert_to<double>());
    out.exact_Z = z;
  } else {
    out.log_Z = opts.policy == Policy::serial ? enumerate_tilings_serial(table) : enumerate_tilings_parallel(table);
  }
  out.pressure = out.log_Z / static_cast<double>(table.N);
  return out;
}

PartitionResult exact_partition(const Weighting& f, const ExactOptions& opts) {
  const auto N = f.lattice().size();
  const int n = f.tile_size();
  // Refuse before tabulating anything.
  const double log_count = log_tiling_count(N, n);
  if (log_count > std::log(opts.budget)) {
    throw BudgetExceeded(fmt::format("exact enumeration needs ~10^{:.2f} tilings, budget is {:g}",
                                     log_count / std::log(10.0), opts.budget),
                         log_count / std::log(10.0));
  }
  if (opts.mode == Mode::rational) {
    if (!f.has_exact()) throw DomainError("rational mode needs a weighting with exact values");
    if (N > kRationalMaxVertices) throw DomainError(fmt::format("rational mode is limited to N <= {}", kRationalMaxVertices));
    auto table = SubsetTable::build_exact(N, n, [&f](std::span<const Vertex> s) { return f.exact_value(s); });
    return exact_partition(table, opts);
  }
  auto table = SubsetTable::build(N, n, [&f](std::span<const Vertex> s) { return f.log_value(s); });
  return exact_partition(table, opts);
}

PartitionResult exact_partition(const CoarseWeighting& fbar, const ExactOptions& opts) {
  if (opts.mode == Mode::rational) throw DomainError("coarse activities are float-only");
  const auto N = fbar.dissection().lattice().size();
  const int n = fbar.tile_size();
  const double log_count = log_tiling_count(N, n);
  if (log_count > std::log(opts.budget)) {
    throw BudgetExceeded("exact enumeration of the coarse partition function exceeds budget",
                         log_count / std::log(10.0));
  }
  auto table = SubsetTable::build(N, n, [&fbar](std::span<const Vertex> s) { return fbar.log_value(s); });
  return exact_partition(table, opts);
}

PartitionResult z0_hat(std::int64_t N, int n) {
  if (n < 1 || N % n != 0) throw DomainError(fmt::format("tile size {} does not divide N = {}", n, N));
  const double blocks = static_cast<double>(N / n);
  PartitionResult out;
  out.N = N;
  out.n = n;
  out.log_Z = blocks * (log_factorial(n - 1) + log_factorial(N - n) - log_factorial(N - 1)) + log_factorial(N) -
              log_factorial(N / n) - blocks * log_factorial(n);
  out.pressure = out.log_Z / static_cast<double>(N);
  return out;
}

Z0Limit z0_limit(int n) {
  if (n < 1) throw DomainError("tile size must be positive");
  double p = static_cast<double>(1 - n) / static_cast<double>(n);
  return {p, std::exp(p)};
}

LogNum universal_bound(std::int64_t N, int n) {
  if (n < 1 || N % n != 0) throw DomainError(fmt::format("tile size {} does not divide N = {}", n, N));
  const auto blocks = N / n;
  const double log_z_plus =
      static_cast<double>(blocks) * std::log(static_cast<double>(blocks)) - log_factorial(blocks);
  return LogNum::from_log(log_z_plus / static_cast<double>(N));
}

Lemma2Report lemma2_gap_bound(const Weighting& f1, const Weighting& f2, double eps, const ExactOptions& opts) {
  if (!(f1.lattice() == f2.lattice()) || f1.tile_size() != f2.tile_size()) {
    throw DomainError("lemma 2 compares activities on the same lattice and tile size");
  }
  const auto N = f1.lattice().size();
  double observed = 0.0;
  for_each_subset(N, f1.tile_size(), [&](std::span<const std::int64_t> s) {
    observed = std::max(observed, std::abs(std::expm1(f2.log_value(s) - f1.log_value(s))));
  });
  Lemma2Report out{};
  out.observed_eps = observed;
  out.applicable = leq_with_slack(observed, eps);
  auto z1 = exact_partition(f1, opts);
  auto z2 = exact_partition(f2, opts);
  out.gap = std::abs(z1.root() - z2.root());
  out.bound = eps * universal_bound(N, f1.tile_size()).value();
  out.holds = out.applicable && leq_with_slack(out.gap, out.bound);
  return out;
}

}  // namespace elastic
