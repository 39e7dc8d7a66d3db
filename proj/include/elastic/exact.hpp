#ifndef ELASTIC_EXACT_HPP
#define ELASTIC_EXACT_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "elastic/numerics.hpp"
#include "elastic/weighting.hpp"

namespace elastic {

enum class Mode { float_mode, rational };
Mode parse_mode(const std::string& name);
std::string to_string(Mode mode);

enum class Policy { serial, parallel };

inline constexpr double kDefaultBudget = 1e8;
/// Rational arithmetic is only offered on lattices this small.
inline constexpr std::int64_t kRationalMaxVertices = 12;

struct ExactOptions {
  Mode mode = Mode::float_mode;
  Policy policy = Policy::parallel;
  double budget = kDefaultBudget;  // max tilings enumerated
};

struct PartitionResult {
  double log_Z = 0.0;
  double pressure = 0.0;  // log_Z / N
  std::int64_t N = 0;
  int n = 0;
  Mode mode = Mode::float_mode;
  std::optional<Rational> exact_Z;

  double Z() const { return std::exp(log_Z); }
  /// Z^{1/N}
  double root() const { return std::exp(pressure); }
};

/// ln of the number of tilings: N! / ((N/n)! (n!)^{N/n}).
double log_tiling_count(std::int64_t N, int n);

/// Activities of every n-subset of the lattice, indexed by colex rank and
/// stored relative to a reference log value so that products stay in range.
struct SubsetTable {
  std::int64_t N = 0;
  int n = 0;
  double log_ref = 0.0;
  std::vector<double> scaled;  // exp(log f(S) - log_ref)
  std::vector<Rational> exact; // empty unless rational values were supplied

  static SubsetTable build(std::int64_t N, int n, const std::function<double(std::span<const Vertex>)>& log_f);
  static SubsetTable build_exact(std::int64_t N, int n,
                                 const std::function<Rational(std::span<const Vertex>)>& f);
};

/// Sum over all set partitions of {0..N-1} into n-blocks of the product of
/// block activities. Each partition is produced once: the lowest uncovered
/// vertex is always completed first. Returns ln of the sum.
double enumerate_tilings_serial(const SubsetTable& table);
/// Same sum with branches of the recursion distributed over OpenMP threads.
/// Branch results are reduced in a fixed order, so the value does not depend
/// on the thread count.
double enumerate_tilings_parallel(const SubsetTable& table);
Rational enumerate_tilings_exact(const SubsetTable& table);

PartitionResult exact_partition(const Weighting& f, const ExactOptions& opts = {});
/// Partition function of the box-averaged activity.
PartitionResult exact_partition(const CoarseWeighting& fbar, const ExactOptions& opts = {});
PartitionResult exact_partition(const SubsetTable& table, const ExactOptions& opts = {});

/// Constant-activity partition function and pressure, closed form.
PartitionResult z0_hat(std::int64_t N, int n);

struct Z0Limit {
  double pressure;  // (1 - n) / n
  double Z0;        // e^{(1-n)/n}
};
Z0Limit z0_limit(int n);

/// Root bound M with Z^{1/N} <= M for every normalized activity:
/// [(N/n)^{N/n} / (N/n)!]^{1/N}.
LogNum universal_bound(std::int64_t N, int n);

struct Lemma2Report {
  bool applicable;       // |f1 - f2| <= eps f1 held on every placement
  double observed_eps;   // max |f1 - f2| / f1
  double gap;            // |Z(f1)^{1/N} - Z(f2)^{1/N}|
  double bound;          // eps * M
  bool holds;
};

/// Gap between partition-function roots of two pointwise-close activities,
/// against eps times the universal bound.
Lemma2Report lemma2_gap_bound(const Weighting& f1, const Weighting& f2, double eps,
                              const ExactOptions& opts = {});

}  // namespace elastic

#endif  // ELASTIC_EXACT_HPP
