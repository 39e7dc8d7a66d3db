#include "elastic/weighting.hpp"

#include <algorithm>
#include <mutex>
#include <numeric>
#include <shared_mutex>
#include <unordered_map>

#include <fmt/format.h>

#include "elastic/combinatorics.hpp"
#include "elastic/errors.hpp"

namespace elastic {

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Cap on the completion sum evaluated at construction.
constexpr std::int64_t kMaxNormalizationTerms = 50'000'000;

}  // namespace

std::uint64_t stable_hash(const TupleKey& key, std::uint64_t seed) {
  std::uint64_t h = splitmix64(seed ^ static_cast<std::uint64_t>(key.dim));
  for (auto x : key.rows) h = splitmix64(h ^ static_cast<std::uint64_t>(x));
  return h;
}

std::size_t TupleKeyHash::operator()(const TupleKey& key) const {
  return static_cast<std::size_t>(stable_hash(key, 0));
}

TupleKey canonical_key(std::span<const Vertex> tuple, const Lattice& lat) {
  const auto d = static_cast<std::size_t>(lat.dim());
  const auto n = tuple.size();
  const auto edge = lat.edge();
  std::vector<std::int64_t> c(n * d);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t a = 0; a < d; ++a) c[k * d + a] = lat.coord(tuple[k], static_cast<int>(a));
  }
  TupleKey best{static_cast<int>(d), {}};
  std::vector<std::int64_t> rows(n * d);
  std::vector<std::int64_t> cand(n * d);
  std::vector<std::size_t> order(n);
  auto row_less = [&](std::size_t x, std::size_t y) {
    return std::lexicographical_compare(rows.begin() + static_cast<std::ptrdiff_t>(x * d),
                                        rows.begin() + static_cast<std::ptrdiff_t>((x + 1) * d),
                                        rows.begin() + static_cast<std::ptrdiff_t>(y * d),
                                        rows.begin() + static_cast<std::ptrdiff_t>((y + 1) * d));
  };
  for (std::size_t anchor = 0; anchor < n; ++anchor) {
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t a = 0; a < d; ++a) {
        auto x = c[k * d + a] - c[anchor * d + a];
        rows[k * d + a] = x < 0 ? x + edge : x;
      }
    }
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), row_less);
    for (std::size_t i = 0; i < n; ++i) {
      std::copy_n(rows.begin() + static_cast<std::ptrdiff_t>(order[i] * d), d,
                  cand.begin() + static_cast<std::ptrdiff_t>(i * d));
    }
    if (anchor == 0 || cand < best.rows) best.rows = cand;
  }
  return best;
}

namespace {

template <typename Fn>
void for_each_member_pair(const TupleKey& key, const Lattice& lat, Norm norm, Fn&& fn) {
  const auto n = key.arity();
  Coords disp(static_cast<std::size_t>(key.dim));
  for (std::size_t j = 0; j < n; ++j) {
    auto rj = key.row(j);
    for (std::size_t k = j + 1; k < n; ++k) {
      auto rk = key.row(k);
      for (std::size_t a = 0; a < disp.size(); ++a) disp[a] = lat.min_image(rk[a] - rj[a]);
      fn(displacement_norm(disp, norm));
    }
  }
}

}  // namespace

double key_diameter(const TupleKey& key, const Lattice& lat, Norm norm) {
  double m = 0.0;
  for_each_member_pair(key, lat, norm, [&](double dist) { m = std::max(m, dist); });
  return m;
}

double key_pair_distance_sum(const TupleKey& key, const Lattice& lat, Norm norm) {
  double s = 0.0;
  for_each_member_pair(key, lat, norm, [&](double dist) { s += dist; });
  return s;
}

FamilyKind parse_family(const std::string& name) {
  if (name == "constant") return FamilyKind::constant;
  if (name == "pair-exponential" || name == "pair_exponential") return FamilyKind::pair_exponential;
  if (name == "user-table" || name == "user_table") return FamilyKind::user_table;
  throw DomainError("unknown weighting family '" + name + "'");
}

std::string to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::constant: return "constant";
    case FamilyKind::pair_exponential: return "pair-exponential";
    case FamilyKind::user_table: return "user-table";
  }
  return "?";
}

// --- Weighting -----------------------------------------------------------

struct Weighting::Impl {
  Lattice lat;
  int n;
  RawLogFn raw;
  std::optional<RawExactFn> exact;
  Norm norm;
  std::string label;
  double log_norm = 0.0;
  Rational exact_norm = 1;

  mutable std::shared_mutex memo_mutex;
  mutable std::unordered_map<TupleKey, double, TupleKeyHash> memo;

  Impl(const Lattice& l, int tile, RawLogFn r, std::optional<RawExactFn> e, Norm nm, std::string lb)
      : lat(l), n(tile), raw(std::move(r)), exact(std::move(e)), norm(nm), label(std::move(lb)) {}

  double lookup(const TupleKey& key) const {
    {
      std::shared_lock lock(memo_mutex);
      auto it = memo.find(key);
      if (it != memo.end()) return it->second;
    }
    double v = raw(key);
    if (!std::isfinite(v)) throw DomainError("weighting '" + label + "' has a non-positive or non-finite raw value");
    v -= log_norm;
    std::unique_lock lock(memo_mutex);
    memo.emplace(key, v);
    return v;
  }
};

namespace {

// Visits every (n-1)-completion of `base`: the tuple (base, others...) with
// the others distinct, unordered, and different from base.
template <typename Fn>
void for_each_completion(const Lattice& lat, int n, Vertex base, Fn&& fn) {
  const auto N = lat.size();
  std::vector<Vertex> tuple(static_cast<std::size_t>(n));
  tuple[0] = base;
  for_each_subset(N - 1, n - 1, [&](std::span<const std::int64_t> idx) {
    for (std::size_t k = 0; k < idx.size(); ++k) {
      auto v = idx[k];
      tuple[k + 1] = v >= base ? v + 1 : v;
    }
    fn(std::span<const Vertex>(tuple));
  });
}

}  // namespace

Weighting::Weighting(const Lattice& lat, int tile_size, RawLogFn raw, std::optional<RawExactFn> exact,
                     Norm norm, std::string label) {
  if (tile_size < 1) throw DomainError("tile size must be at least 1");
  if (lat.size() % tile_size != 0) {
    throw DomainError(fmt::format("tile size {} does not divide N = {}", tile_size, lat.size()));
  }
  if (log_binomial(lat.size() - 1, tile_size - 1) > std::log(static_cast<double>(kMaxNormalizationTerms))) {
    throw DomainError("normalization sum too large to evaluate directly");
  }
  auto impl = std::make_shared<Impl>(lat, tile_size, std::move(raw), std::move(exact), norm, std::move(label));

  std::vector<double> logs;
  Rational exact_sum = 0;
  for_each_completion(lat, tile_size, 0, [&](std::span<const Vertex> t) {
    auto key = canonical_key(t, lat);
    double v = impl->raw(key);
    if (!std::isfinite(v)) throw DomainError("weighting '" + impl->label + "' has a non-positive raw value");
    logs.push_back(v);
    if (impl->exact) {
      Rational q = (*impl->exact)(key);
      if (q <= 0) throw DomainError("weighting '" + impl->label + "' has a non-positive exact raw value");
      exact_sum += q;
    }
  });
  impl->log_norm = log_sum_exp(logs);
  if (!std::isfinite(impl->log_norm)) throw DomainError("normalizing sum overflowed");
  if (impl->exact) impl->exact_norm = exact_sum;
  impl_ = std::move(impl);
}

const Lattice& Weighting::lattice() const { return impl_->lat; }
int Weighting::tile_size() const { return impl_->n; }
Norm Weighting::norm() const { return impl_->norm; }
const std::string& Weighting::label() const { return impl_->label; }
double Weighting::log_normalizer() const { return impl_->log_norm; }
bool Weighting::has_exact() const { return impl_->exact.has_value(); }

double Weighting::log_value(const TupleKey& key) const { return impl_->lookup(key); }

double Weighting::log_value(std::span<const Vertex> tuple) const {
  if (tuple.size() != static_cast<std::size_t>(impl_->n)) throw DomainError("tuple arity differs from tile size");
  return impl_->lookup(canonical_key(tuple, impl_->lat));
}

Rational Weighting::exact_value(std::span<const Vertex> tuple) const {
  if (!impl_->exact) throw DomainError("weighting '" + impl_->label + "' has no exact values");
  return (*impl_->exact)(canonical_key(tuple, impl_->lat)) / impl_->exact_norm;
}

double Weighting::normalization_residual(Vertex base) const {
  if (!impl_->lat.contains(base)) throw DomainError("invalid base vertex");
  CompensatedSum sum;
  for_each_completion(impl_->lat, impl_->n, base,
                      [&](std::span<const Vertex> t) { sum += std::exp(log_value(t)); });
  return std::abs(sum.value() - 1.0);
}

Weighting build_weighting(const WeightingFamily& family, const Lattice& lat, int tile_size) {
  switch (family.kind) {
    case FamilyKind::constant:
      return Weighting(
          lat, tile_size, [](const TupleKey&) { return 0.0; },
          RawExactFn([](const TupleKey&) { return Rational(1); }), family.norm, "constant");
    case FamilyKind::pair_exponential: {
      if (!(family.scale > 0.0)) throw DomainError("pair-exponential scale must be positive");
      const double inv = 1.0 / family.scale;
      const Norm norm = family.norm;
      return Weighting(
          lat, tile_size,
          [lat, inv, norm](const TupleKey& key) { return -inv * key_pair_distance_sum(key, lat, norm); },
          std::nullopt, family.norm, fmt::format("pair-exponential(ell={})", family.scale));
    }
    case FamilyKind::user_table: {
      if (!family.table) throw DomainError("user-table family without a table");
      auto table = family.table;
      auto lookup = [table](const TupleKey& key) -> const TableValue& {
        auto it = table->entries.find(key);
        return it == table->entries.end() ? table->fallback : it->second;
      };
      bool all_exact = table->fallback.exact.has_value();
      for (const auto& [key, v] : table->entries) {
        if (!(v.value > 0.0)) throw DomainError("user-table values must be positive");
        all_exact = all_exact && v.exact.has_value();
      }
      if (!(table->fallback.value > 0.0)) throw DomainError("user-table fallback must be positive");
      std::optional<RawExactFn> exact;
      if (all_exact) exact = [lookup](const TupleKey& key) { return *lookup(key).exact; };
      return Weighting(
          lat, tile_size, [lookup](const TupleKey& key) { return std::log(lookup(key).value); },
          std::move(exact), family.norm, "user-table");
    }
  }
  throw DomainError("unknown family");
}

Weighting tilted_weighting(const Weighting& base, double amplitude, std::uint64_t seed) {
  if (!(amplitude >= 0.0 && amplitude < 1.0)) throw DomainError("tilt amplitude must lie in [0, 1)");
  auto raw = [base, amplitude, seed](const TupleKey& key) {
    double u = static_cast<double>(stable_hash(key, seed) >> 11) * 0x1.0p-53;
    return base.log_value(key) + std::log1p(amplitude * (2.0 * u - 1.0));
  };
  return Weighting(base.lattice(), base.tile_size(), raw, std::nullopt, base.norm(),
                   fmt::format("{}+tilt({})", base.label(), amplitude));
}

// --- smoothness and decay ------------------------------------------------

namespace {

// Tuples with first member pinned at vertex 0; translation invariance makes
// these representative of all tuples. Index t enumerates {0..N-1}^{n-1}.
void decode_pinned(std::int64_t t, std::int64_t N, std::span<Vertex> tuple) {
  tuple[0] = 0;
  for (std::size_t k = tuple.size(); k-- > 1;) {
    tuple[k] = t % N;
    t /= N;
  }
}

std::int64_t pinned_count(const Weighting& f) {
  const auto N = f.lattice().size();
  double logc = static_cast<double>(f.tile_size() - 1) * std::log(static_cast<double>(N));
  if (logc > std::log(1e9)) throw BudgetExceeded("tuple scan too large", logc / std::log(10.0));
  std::int64_t c = 1;
  for (int k = 1; k < f.tile_size(); ++k) c *= N;
  return c;
}

double worst_move_ratio(const Weighting& f, std::int64_t t, std::vector<Vertex>& tuple) {
  const auto& lat = f.lattice();
  decode_pinned(t, lat.size(), tuple);
  const double base = f.log_value(tuple);
  double worst = 0.0;
  for (std::size_t p = 0; p < tuple.size(); ++p) {
    const Vertex keep = tuple[p];
    for (int axis = 0; axis < lat.dim(); ++axis) {
      for (int dir : {-1, 1}) {
        tuple[p] = lat.step(keep, axis, dir);
        worst = std::max(worst, std::abs(std::expm1(f.log_value(tuple) - base)));
      }
    }
    tuple[p] = keep;
  }
  return worst;
}

}  // namespace

double smoothness_serial(const Weighting& f) {
  const auto count = pinned_count(f);
  std::vector<Vertex> tuple(static_cast<std::size_t>(f.tile_size()));
  double worst = 0.0;
  for (std::int64_t t = 0; t < count; ++t) worst = std::max(worst, worst_move_ratio(f, t, tuple));
  return worst;
}

double smoothness(const Weighting& f) {
  const auto count = pinned_count(f);
  double worst = 0.0;
#pragma omp parallel reduction(max : worst)
  {
    std::vector<Vertex> tuple(static_cast<std::size_t>(f.tile_size()));
#pragma omp for schedule(static)
    for (std::int64_t t = 0; t < count; ++t) worst = std::max(worst, worst_move_ratio(f, t, tuple));
  }
  return worst;
}

double decay_radius(const Weighting& f) {
  const auto& lat = f.lattice();
  const auto count = pinned_count(f);
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<Vertex> tuple(static_cast<std::size_t>(f.tile_size()));
  double radius = 0.0;
  for (std::int64_t t = 0; t < count; ++t) {
    decode_pinned(t, lat.size(), tuple);
    auto key = canonical_key(tuple, lat);
    double lf = f.log_value(key);
    double diam = key_diameter(key, lat, f.norm());
    if (diam == 0.0) {
      if (lf > 0.0) return inf;
      continue;
    }
    if (lf >= 0.0) return inf;
    radius = std::max(radius, diam / -lf);
  }
  return radius;
}

ScaledWeighting scale_weighting(const Weighting& f, std::int64_t lambda) {
  const auto& lat = f.lattice();
  if (lambda < 1 || lat.edge() % lambda != 0) {
    throw DomainError(fmt::format("scale factor {} incompatible with L = {}", lambda, lat.edge()));
  }
  Lattice coarse(lat.dim(), lat.edge() / lambda);
  const double log_jacobian = lat.dim() * std::log(static_cast<double>(lambda));
  auto lift = [lat, coarse, lambda](const TupleKey& key) {
    std::vector<Vertex> fine(key.arity());
    Coords at(static_cast<std::size_t>(lat.dim()));
    for (std::size_t k = 0; k < fine.size(); ++k) {
      auto row = key.row(k);
      for (std::size_t a = 0; a < at.size(); ++a) at[a] = lambda * row[a];
      fine[k] = lat.vertex(at);
    }
    return fine;
  };
  std::optional<RawExactFn> exact;
  if (f.has_exact()) {
    BigInt jac = 1;
    for (int a = 0; a < lat.dim(); ++a) jac *= lambda;
    exact = [f, lift, jac](const TupleKey& key) { return Rational(jac) * f.exact_value(lift(key)); };
  }
  Weighting scaled(
      coarse, f.tile_size(),
      [f, lift, log_jacobian](const TupleKey& key) { return log_jacobian + f.log_value(lift(key)); },
      std::move(exact), f.norm(), fmt::format("{}^{}", f.label(), lambda));
  double defect = std::abs(std::expm1(scaled.log_normalizer()));
  return {std::move(scaled), defect};
}

// --- coarse graining -----------------------------------------------------

CoarseWeighting::CoarseWeighting(Weighting base, Dissection dis, std::map<TupleKey, double> log_table)
    : base_(std::move(base)), dis_(std::move(dis)), table_(std::move(log_table)) {}

double CoarseWeighting::log_value_for_boxes(std::span<const std::int64_t> boxes) const {
  auto it = table_.find(canonical_key(boxes, dis_.box_lattice()));
  if (it == table_.end()) throw DomainError("box pattern missing from coarse table");
  return it->second;
}

double CoarseWeighting::log_value(std::span<const Vertex> tuple) const {
  std::vector<std::int64_t> boxes(tuple.size());
  for (std::size_t k = 0; k < tuple.size(); ++k) boxes[k] = dis_.box_of(tuple[k]);
  return log_value_for_boxes(boxes);
}

namespace {

// One representative box sequence per canonical pattern, first box pinned at 0.
std::vector<std::pair<TupleKey, std::vector<std::int64_t>>> box_patterns(const Dissection& dis, int n) {
  const auto& blat = dis.box_lattice();
  std::map<TupleKey, std::vector<std::int64_t>> found;
  std::vector<std::int64_t> boxes(static_cast<std::size_t>(n), 0);
  for_each_tuple(blat.size(), static_cast<std::size_t>(n - 1), [&](std::span<const std::int64_t> rest) {
    if (!std::is_sorted(rest.begin(), rest.end())) return;
    std::copy(rest.begin(), rest.end(), boxes.begin() + 1);
    found.try_emplace(canonical_key(boxes, blat), boxes);
  });
  return {found.begin(), found.end()};
}

double polycube_log_mean(const TupleLogFn& log_f, const Dissection& dis, std::span<const std::int64_t> boxes) {
  const auto n = boxes.size();
  std::vector<std::vector<Vertex>> cells(n);
  for (std::size_t k = 0; k < n; ++k) cells[k] = dis.box_vertices(boxes[k]);
  std::vector<Vertex> tuple(n);
  CompensatedSum sum;
  double ref = 0.0;
  std::int64_t count = 0;
  for_each_tuple(dis.box_volume(), n, [&](std::span<const std::int64_t> idx) {
    for (std::size_t k = 0; k < n; ++k) {
      tuple[k] = cells[k][static_cast<std::size_t>(idx[k])];
      for (std::size_t j = 0; j < k; ++j) {
        if (tuple[j] == tuple[k]) return;
      }
    }
    double lf = log_f(tuple);
    if (count == 0) ref = lf;
    sum += std::exp(lf - ref);
    ++count;
  });
  return ref + std::log(sum.value() / static_cast<double>(count));
}

}  // namespace

std::map<TupleKey, double> coarse_log_table(const TupleLogFn& log_f, const Dissection& dis, int tile_size,
                                            bool parallel) {
  if (dis.box_volume() < tile_size) {
    throw DomainError(fmt::format("coarse averaging needs box volume {} >= tile size {}", dis.box_volume(), tile_size));
  }
  auto patterns = box_patterns(dis, tile_size);
  std::vector<double> means(patterns.size());
  const auto count = static_cast<std::int64_t>(patterns.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::int64_t p = 0; p < count; ++p) {
    auto i = static_cast<std::size_t>(p);
    means[i] = polycube_log_mean(log_f, dis, patterns[i].second);
  }
  std::map<TupleKey, double> table;
  for (std::size_t i = 0; i < patterns.size(); ++i) table.emplace(patterns[i].first, means[i]);
  return table;
}

CoarseWeighting coarse_average(const Weighting& f, const Dissection& dis) {
  if (!(f.lattice() == dis.lattice())) throw DomainError("dissection of a different lattice");
  auto log_f = [&f](std::span<const Vertex> t) { return f.log_value(t); };
  return CoarseWeighting(f, dis, coarse_log_table(log_f, dis, f.tile_size(), true));
}

CoarseWeighting coarse_average_serial(const Weighting& f, const Dissection& dis) {
  if (!(f.lattice() == dis.lattice())) throw DomainError("dissection of a different lattice");
  auto log_f = [&f](std::span<const Vertex> t) { return f.log_value(t); };
  return CoarseWeighting(f, dis, coarse_log_table(log_f, dis, f.tile_size(), false));
}

Lemma3Report lemma3_check(const Weighting& f, const CoarseWeighting& fbar, double sm) {
  const auto& dis = fbar.dissection();
  const auto& lat = f.lattice();
  const int n = f.tile_size();
  Lemma3Report out{};
  out.alpha = static_cast<double>(dis.box_edge()) * lat.dim() * n * sm;
  out.vacuous = out.alpha >= 1.0;
  out.bound = out.vacuous ? std::numeric_limits<double>::infinity() : out.alpha / (1.0 - out.alpha);
  double worst = 0.0;
  for (Vertex first : dis.box_vertices(0)) {
    for_each_completion(lat, n, first, [&](std::span<const Vertex> t) {
      worst = std::max(worst, std::abs(std::expm1(fbar.log_value(t) - f.log_value(t))));
    });
  }
  out.worst_ratio = worst;
  out.holds = out.vacuous || leq_with_slack(worst, out.bound);
  return out;
}

Lemma3Report lemma3_check(const Weighting& f, const Dissection& dis) {
  auto fbar = coarse_average(f, dis);
  return lemma3_check(f, fbar, smoothness(f));
}

PlacementMass placement_mass(const Weighting& f, bool exact) {
  const auto& lat = f.lattice();
  const int n = f.tile_size();
  CompensatedSum sum;
  Rational q = 0;
  if (exact && !f.has_exact()) throw DomainError("exact placement mass needs an exact weighting");
  for_each_subset(lat.size(), n, [&](std::span<const std::int64_t> s) {
    sum += std::exp(f.log_value(s));
    if (exact) q += f.exact_value(s);
  });
  PlacementMass out{sum.value(), std::nullopt};
  if (exact) out.exact = q;
  return out;
}

}  // namespace elastic
