#ifndef ELASTIC_WEIGHTING_HPP
#define ELASTIC_WEIGHTING_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "elastic/lattice.hpp"
#include "elastic/numerics.hpp"

namespace elastic {

/// Canonical form of an n-tuple of lattice points up to translation and
/// permutation. Each vertex becomes its displacement from an anchor vertex,
/// reduced into [0, L)^d; rows are sorted, and the anchor is whichever member
/// yields the lexicographically least row sequence. Row 0 is always zero.
struct TupleKey {
  int dim = 0;
  std::vector<std::int64_t> rows;  // n * dim entries

  std::size_t arity() const { return dim == 0 ? 0 : rows.size() / static_cast<std::size_t>(dim); }
  std::span<const std::int64_t> row(std::size_t k) const {
    return {rows.data() + k * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }

  auto operator<=>(const TupleKey&) const = default;
  bool operator==(const TupleKey&) const = default;
};

struct TupleKeyHash {
  std::size_t operator()(const TupleKey& key) const;
};

/// Platform-independent 64-bit hash of a key, mixed with a seed.
std::uint64_t stable_hash(const TupleKey& key, std::uint64_t seed);

TupleKey canonical_key(std::span<const Vertex> tuple, const Lattice& lat);

/// Largest pairwise minimal-image distance among the key's members.
double key_diameter(const TupleKey& key, const Lattice& lat, Norm norm);
/// Sum over unordered member pairs of the minimal-image distance.
double key_pair_distance_sum(const TupleKey& key, const Lattice& lat, Norm norm);

/// User-supplied raw value for a canonical tuple class.
struct TableValue {
  double value = 1.0;
  std::optional<Rational> exact;
};

struct UserTable {
  std::map<TupleKey, TableValue> entries;
  TableValue fallback;  // applies to every class not listed
};

enum class FamilyKind { constant, pair_exponential, user_table };

FamilyKind parse_family(const std::string& name);
std::string to_string(FamilyKind kind);

struct WeightingFamily {
  FamilyKind kind = FamilyKind::constant;
  double scale = 1.0;  // smoothness length; raw value exp(-sum_{j<k} dist / scale)
  Norm norm = Norm::euclidean;
  std::shared_ptr<const UserTable> table;

  static WeightingFamily constant() { return {}; }
  static WeightingFamily pair_exponential(double scale, Norm norm = Norm::euclidean) {
    return {FamilyKind::pair_exponential, scale, norm, nullptr};
  }
  static WeightingFamily user_table(std::shared_ptr<const UserTable> t, Norm norm = Norm::euclidean) {
    return {FamilyKind::user_table, 1.0, norm, std::move(t)};
  }
};

/// Log of an unnormalized, strictly positive raw activity.
using RawLogFn = std::function<double(const TupleKey&)>;
/// Exact raw activity; optional, enables rational-mode computations.
using RawExactFn = std::function<Rational(const TupleKey&)>;

/// Normalized activity f on n-tuples of a periodic lattice. Values depend on
/// the tuple only through its canonical key, so symmetry and translation
/// invariance hold by construction; positivity and the completion-sum
/// normalization are enforced when the weighting is built.
///
/// Copies share the evaluator and its memo. Evaluation is safe from
/// concurrent readers.
class Weighting {
 public:
  Weighting(const Lattice& lat, int tile_size, RawLogFn raw, std::optional<RawExactFn> exact,
            Norm norm, std::string label);

  const Lattice& lattice() const;
  int tile_size() const;
  Norm norm() const;
  const std::string& label() const;

  double log_value(std::span<const Vertex> tuple) const;
  double log_value(const TupleKey& key) const;
  double value(std::span<const Vertex> tuple) const { return std::exp(log_value(tuple)); }

  bool has_exact() const;
  Rational exact_value(std::span<const Vertex> tuple) const;

  /// ln of the divisor applied to raw values at construction.
  double log_normalizer() const;

  /// |(1/(n-1)!) sum over distinct completions of base - 1|.
  double normalization_residual(Vertex base) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

Weighting build_weighting(const WeightingFamily& family, const Lattice& lat, int tile_size);

/// f' = f * (1 + amplitude * t(key)) renormalized, with t in [-1, 1] drawn
/// from a seeded hash of the canonical key. Used for pointwise-close pairs.
Weighting tilted_weighting(const Weighting& base, double amplitude, std::uint64_t seed);

/// Largest |f(i + u) - f(i)| / f(i) over all tuples, diagonals included, and
/// all single-vertex unit moves.
double smoothness(const Weighting& f);
double smoothness_serial(const Weighting& f);

/// Smallest R with f <= exp(-maxdist / R) on every tuple; +inf when none exists.
double decay_radius(const Weighting& f);

struct ScaledWeighting {
  Weighting weighting;
  double normalization_defect;  // |sum - 1| before renormalizing
};

/// f^lambda(x) = lambda^d f(lambda x), defined on the lattice of edge L / lambda
/// and renormalized.
ScaledWeighting scale_weighting(const Weighting& f, std::int64_t lambda);

/// Box-averaged activity: depends only on which box each tuple member lies in.
class CoarseWeighting {
 public:
  CoarseWeighting(Weighting base, Dissection dis, std::map<TupleKey, double> log_table);

  const Weighting& base() const { return base_; }
  const Dissection& dissection() const { return dis_; }
  int tile_size() const { return base_.tile_size(); }

  /// Table keyed by canonical box patterns (keys on the box lattice).
  const std::map<TupleKey, double>& log_table() const { return table_; }

  double log_value(std::span<const Vertex> tuple) const;
  double log_value_for_boxes(std::span<const std::int64_t> boxes) const;
  double value(std::span<const Vertex> tuple) const { return std::exp(log_value(tuple)); }

 private:
  Weighting base_;
  Dissection dis_;
  std::map<TupleKey, double> table_;
};

/// Off-diagonal average of f over each box pattern. Requires boxes holding
/// at least n vertices, so that every pattern has an off-diagonal tuple.
CoarseWeighting coarse_average(const Weighting& f, const Dissection& dis);
CoarseWeighting coarse_average_serial(const Weighting& f, const Dissection& dis);

using TupleLogFn = std::function<double(std::span<const Vertex>)>;

/// The averaging step on its own, for any symmetric box-translation-invariant
/// tuple function: one off-diagonal log-mean per canonical box pattern.
std::map<TupleKey, double> coarse_log_table(const TupleLogFn& log_f, const Dissection& dis,
                                            int tile_size, bool parallel = true);

struct Lemma3Report {
  double alpha;        // ell_bar * d * n * sm(f)
  double bound;        // alpha / (1 - alpha), +inf when vacuous
  double worst_ratio;  // max |f - fbar| / f over off-diagonal tuples
  bool vacuous;        // alpha >= 1
  bool holds;
};

Lemma3Report lemma3_check(const Weighting& f, const Dissection& dis);
Lemma3Report lemma3_check(const Weighting& f, const CoarseWeighting& fbar, double sm);

struct PlacementMass {
  double value;
  std::optional<Rational> exact;
};

/// Sum of f over all n-subsets of the lattice; equals N / n for any
/// normalized weighting.
PlacementMass placement_mass(const Weighting& f, bool exact = false);

}  // namespace elastic

#endif  // ELASTIC_WEIGHTING_HPP
