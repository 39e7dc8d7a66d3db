#include "elastic/ladder.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>

#include "elastic/combinatorics.hpp"
#include "elastic/errors.hpp"

namespace elastic {

namespace {

void require_divides(std::int64_t a, std::int64_t b, const char* what) {
  if (a < 1 || b % a != 0) throw DomainError(fmt::format("{}: {} does not divide {}", what, a, b));
}

double box_factor(std::int64_t box_count, std::int64_t box_volume) {
  const double v = static_cast<double>(box_volume);
  return static_cast<double>(box_count) * (log_factorial(box_volume) - v * std::log(v));
}

}  // namespace

double z_plus(std::int64_t N, int n, std::int64_t box_volume) {
  require_divides(n, N, "z_plus tile size");
  require_divides(box_volume, N, "z_plus box volume");
  const auto blocks = N / n;
  const double b = static_cast<double>(blocks);
  return -log_factorial(blocks) + b * std::log(static_cast<double>(N)) + box_factor(N / box_volume, box_volume) -
         b * std::log(static_cast<double>(n));
}

double z_plus(const Dissection& dis, int n) { return z_plus(dis.lattice().size(), n, dis.box_volume()); }

double z_prime(const CoarseWeighting& fbar, const ZPrimeOptions& opts) {
  const auto& dis = fbar.dissection();
  const auto N = dis.lattice().size();
  const int n = fbar.tile_size();
  const auto boxes = dis.box_count();
  const auto nbar = dis.box_volume();
  if (boxes > opts.max_boxes) {
    throw BudgetExceeded(fmt::format("Z' dynamic program limited to {} boxes, instance has {}", opts.max_boxes, boxes),
                         0.0);
  }
  const double log_states = static_cast<double>(boxes) * std::log(static_cast<double>(nbar + 1));
  if (log_states > std::log(static_cast<double>(opts.max_states))) {
    throw BudgetExceeded("Z' occupancy lattice exceeds the state budget", log_states / std::log(10.0));
  }
  const auto radix = nbar + 1;
  std::int64_t states = 1;
  for (std::int64_t b = 0; b < boxes; ++b) states *= radix;

  // Per-set occupancy profiles r (sum n), with weight fbar(r) prod C(nbar, r_j).
  struct Profile {
    std::vector<std::int64_t> counts;
    std::int64_t offset;  // mixed-radix index of r
    double weight;
  };
  std::vector<Profile> profiles;
  for_each_tuple(n + 1, static_cast<std::size_t>(boxes), [&](std::span<const std::int64_t> r) {
    std::int64_t total = 0;
    for (auto x : r) total += x;
    if (total != n) return;
    std::vector<std::int64_t> members;
    double log_w = 0.0;
    std::int64_t offset = 0;
    for (std::size_t j = 0; j < r.size(); ++j) {
      for (std::int64_t c = 0; c < r[j]; ++c) members.push_back(static_cast<std::int64_t>(j));
      log_w += log_binomial(nbar, r[j]);
      offset = offset * radix + r[j];
    }
    if (log_w == kNegInf) return;
    log_w += fbar.log_value_for_boxes(members);
    profiles.push_back({{r.begin(), r.end()}, offset, log_w});
  });
  // Normalize the per-set generating function to keep the DP in range.
  std::vector<double> logs;
  for (const auto& p : profiles) logs.push_back(p.weight);
  const double log_scale = log_sum_exp(logs);
  for (auto& p : profiles) p.weight = std::exp(p.weight - log_scale);

  std::vector<double> cur(static_cast<std::size_t>(states), 0.0);
  std::vector<double> next(cur.size());
  cur[0] = 1.0;
  std::vector<std::int64_t> digits(static_cast<std::size_t>(boxes));
  const auto blocks = N / n;
  for (std::int64_t step = 0; step < blocks; ++step) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::int64_t s = 0; s < states; ++s) {
      const double v = cur[static_cast<std::size_t>(s)];
      if (v == 0.0) continue;
      auto rem = s;
      for (auto j = boxes; j-- > 0;) {
        digits[static_cast<std::size_t>(j)] = rem % radix;
        rem /= radix;
      }
      for (const auto& p : profiles) {
        bool fits = true;
        for (std::size_t j = 0; j < digits.size(); ++j) {
          if (digits[j] + p.counts[j] > nbar) {
            fits = false;
            break;
          }
        }
        if (fits) next[static_cast<std::size_t>(s + p.offset)] += v * p.weight;
      }
    }
    std::swap(cur, next);
  }
  const double admissible = cur.back();  // every digit equal to nbar
  if (admissible <= 0.0) return kNegInf;
  return std::log(admissible) + static_cast<double>(blocks) * log_scale - log_factorial(blocks) +
         box_factor(boxes, nbar);
}

std::vector<std::int64_t> occupancy_vector(std::span<const std::vector<Vertex>> sets, const Dissection& dis) {
  std::vector<std::int64_t> occ(static_cast<std::size_t>(dis.box_count()), 0);
  for (const auto& s : sets) {
    for (auto v : s) ++occ[static_cast<std::size_t>(dis.box_of(v))];
  }
  return occ;
}

// --- supertypes ----------------------------------------------------------

Supertype supertype_of(const Superset& s, const Dissection& dis) {
  const auto& blat = dis.box_lattice();
  auto origin = blat.coords(s.pointed_box);
  for (auto& x : origin) x = -x;
  Supertype t;
  for (auto b : s.rest_boxes) t.rest_boxes.push_back(blat.translate(b, origin));
  std::sort(t.rest_boxes.begin(), t.rest_boxes.end());
  return t;
}

double supertype_radius(const Supertype& t, const Dissection& dis, Norm norm) {
  const auto& blat = dis.box_lattice();
  double r = 0.0;
  for (auto b : t.rest_boxes) {
    auto disp = torus_displacement(0, b, blat);
    for (auto& x : disp) x *= dis.box_edge();
    r = std::max(r, displacement_norm(disp, norm));
  }
  return r;
}

std::vector<Supertype> enumerate_supertypes(const Dissection& dis, int n, double cutoff, Norm norm) {
  if (n < 1) throw DomainError("tile size must be positive");
  if (cutoff < 0.0) throw DomainError("cutoff radius must be nonnegative");
  const auto boxes = dis.box_count();
  const auto k = static_cast<std::int64_t>(n - 1);
  std::vector<Supertype> out;
  // Multisets of size k from `boxes` symbols, via k-subsets of boxes + k - 1.
  for_each_subset(boxes + k - 1, k, [&](std::span<const std::int64_t> idx) {
    Supertype t;
    for (std::size_t i = 0; i < idx.size(); ++i) t.rest_boxes.push_back(idx[i] - static_cast<std::int64_t>(i));
    if (supertype_radius(t, dis, norm) <= cutoff * (1.0 + 1e-12)) out.push_back(std::move(t));
  });
  std::sort(out.begin(), out.end());
  return out;
}

std::int64_t covered_count(const Supertype& t, const Dissection& dis) {
  std::map<std::int64_t, std::int64_t> mult;
  for (auto b : t.rest_boxes) ++mult[b];
  std::int64_t count = 1;
  for (const auto& [box, m] : mult) {
    const auto avail = dis.box_volume() - (box == 0 ? 1 : 0);
    count *= binomial(avail, m);
  }
  return count;
}

double supertype_mass(const CoarseWeighting& fbar, const Supertype& t) {
  const auto count = covered_count(t, fbar.dissection());
  if (count == 0) return 0.0;
  std::vector<std::int64_t> boxes{0};
  boxes.insert(boxes.end(), t.rest_boxes.begin(), t.rest_boxes.end());
  return static_cast<double>(count) * std::exp(fbar.log_value_for_boxes(boxes));
}

double MassSpectrum::prefix_mass(std::size_t count) const {
  CompensatedSum s;
  for (std::size_t k = 0; k < std::min(count, entries.size()); ++k) s += entries[k].mass;
  return s.value();
}

MassSpectrum make_mass_spectrum(std::vector<MassEntry> entries, double eps) {
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
  if (entries.empty()) throw DomainError("empty mass spectrum");
  std::stable_sort(entries.begin(), entries.end(), [](const MassEntry& a, const MassEntry& b) {
    if (a.mass != b.mass) return a.mass > b.mass;
    return a.type < b.type;
  });
  MassSpectrum s;
  s.entries = std::move(entries);
  s.eps = eps;
  CompensatedSum running;
  s.Mbar = s.entries.size();
  for (std::size_t k = 0; k < s.entries.size(); ++k) {
    running += s.entries[k].mass;
    if (s.Mbar == s.entries.size() && running.value() > 1.0 - eps / 20.0) s.Mbar = k + 1;
  }
  s.enumerated_mass = running.value();
  const double floor = eps / (20.0 * static_cast<double>(s.Mbar));
  s.M = 1;
  while (s.M < s.Mbar && s.entries[s.M].mass > floor) ++s.M;
  return s;
}

MassSpectrum build_mass_spectrum(const CoarseWeighting& fbar, double eps, double cutoff, Norm norm) {
  auto types = enumerate_supertypes(fbar.dissection(), fbar.tile_size(), cutoff, norm);
  std::vector<MassEntry> entries(types.size());
  const auto count = static_cast<std::int64_t>(types.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < count; ++i) {
    auto k = static_cast<std::size_t>(i);
    entries[k] = {types[k], supertype_mass(fbar, types[k])};
  }
  return make_mass_spectrum(std::move(entries), eps);
}

// --- alpha assignment ----------------------------------------------------

namespace {

BigInt floor_of(const Rational& q) { return numerator(q) / denominator(q); }

}  // namespace

AlphaAssignment choose_alpha(const MassSpectrum& spectrum, std::int64_t nbar, int n, double eps) {
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
  if (spectrum.entries.empty() || spectrum.M == 0) throw DomainError("empty mass spectrum");
  require_divides(n, nbar, "choose_alpha tile size vs box volume");
  AlphaAssignment out;
  out.per_box = nbar / n;
  out.grid = Rational(1, out.per_box);
  out.feasible = static_cast<double>(nbar) > 200.0 * static_cast<double>(spectrum.Mbar) * n / (eps * eps);

  Rational kept = 0;
  for (std::size_t k = 0; k < spectrum.M; ++k) kept += Rational(spectrum.entries[k].mass);
  if (kept <= 0) throw DomainError("kept supertypes carry no mass");

  // Positions measured in grid units: y = alpha * nbar / n.
  std::vector<Rational> y(spectrum.M);
  std::vector<BigInt> lo(spectrum.M);
  for (std::size_t k = 0; k < spectrum.M; ++k) {
    Rational ideal = Rational(spectrum.entries[k].mass) / kept;
    out.entries.push_back({k, 0, 0, ideal});
    y[k] = ideal * out.per_box;
    lo[k] = floor_of(y[k]);
  }
  while (true) {
    std::optional<std::size_t> left;   // nearest to its lower grid point
    std::optional<std::size_t> right;  // nearest to its upper grid point
    Rational best_left;
    Rational best_right;
    for (std::size_t k = 0; k < y.size(); ++k) {
      Rational frac = y[k] - Rational(lo[k]);
      if (frac == 0 || frac == 1) continue;
      if (!left || frac < best_left) {
        left = k;
        best_left = frac;
      }
    }
    if (!left) break;
    for (std::size_t k = 0; k < y.size(); ++k) {
      if (k == *left) continue;
      Rational frac = y[k] - Rational(lo[k]);
      if (frac == 0 || frac == 1) continue;
      if (!right || 1 - frac < best_right) {
        right = k;
        best_right = 1 - frac;
      }
    }
    if (!right) throw InvariantViolation("alpha rounding left a single off-grid value; proportions do not sum to 1");
    Rational t = best_left < best_right ? best_left : best_right;
    y[*left] -= t;
    y[*right] += t;
  }
  for (std::size_t k = 0; k < y.size(); ++k) {
    if (denominator(y[k]) != 1) throw InvariantViolation("alpha rounding did not reach the grid");
    auto& e = out.entries[k];
    e.count = numerator(y[k]).convert_to<std::int64_t>();
    e.alpha = Rational(e.count, out.per_box);
  }
  return out;
}

AlphaContract check_alpha(const MassSpectrum& spectrum, const AlphaAssignment& alpha, double eps) {
  AlphaContract c{true, true, true};
  Rational total = 0;
  const Rational tenth_eps = Rational(eps) / 10;
  for (const auto& e : alpha.entries) {
    Rational scaled = e.alpha * alpha.per_box;
    if (denominator(scaled) != 1 || e.alpha < 0) c.on_grid = false;
    total += e.alpha;
    Rational diff = e.alpha - e.ideal;
    if (diff < 0) diff = -diff;
    if (diff > tenth_eps * Rational(spectrum.entries[e.index].mass)) c.close = false;
  }
  c.sums_to_one = total == 1;
  return c;
}

double log_alpha_mismatch(const MassSpectrum& spectrum, const AlphaAssignment& alpha, int n) {
  CompensatedSum s;
  for (const auto& e : alpha.entries) {
    if (e.count == 0) continue;
    const double a = e.alpha.convert_to<double>();
    s += a / n * std::log(spectrum.entries[e.index].mass / a);
  }
  return s.value();
}

ZMinusFactors z_minus_lower(const Dissection& dis, int n, const MassSpectrum& spectrum, const AlphaAssignment& alpha) {
  const auto N = dis.lattice().size();
  const auto nbar = dis.box_volume();
  require_divides(n, nbar, "Z- tile size vs box volume");
  if (alpha.per_box != nbar / n) throw DomainError("alpha assignment built for a different box volume");
  std::int64_t assigned = 0;
  for (const auto& e : alpha.entries) {
    if (e.count < 0) throw DomainError("negative alpha");
    if (Rational(e.count, alpha.per_box) != e.alpha) throw DomainError("alpha * nbar / n is not an integer");
    assigned += e.count;
  }
  if (assigned != alpha.per_box) throw DomainError("alpha does not sum to 1");

  const auto blocks = N / n;
  const auto boxes = N / nbar;
  const double b = static_cast<double>(blocks);
  const double bx = static_cast<double>(boxes);
  ZMinusFactors f;
  f.log_F[0] = -log_factorial(blocks) + box_factor(boxes, nbar);
  f.log_F[1] = -b * std::log(static_cast<double>(n));
  f.log_F[2] = log_factorial(blocks) - bx * log_factorial(alpha.per_box) + b * std::log(static_cast<double>(nbar));
  CompensatedSum fact;
  CompensatedSum mass;
  for (const auto& e : alpha.entries) {
    fact += log_factorial(e.count);
    if (e.count > 0) mass += static_cast<double>(e.count) * std::log(spectrum.entries[e.index].mass);
  }
  f.log_F[3] = bx * (log_factorial(alpha.per_box) - fact.value());
  f.log_F[4] = bx * mass.value();
  CompensatedSum total;
  for (double x : f.log_F) total += x;
  f.log_total = total.value();
  return f;
}

double approx_root_lower(const MassSpectrum& spectrum, const AlphaAssignment& alpha, int n) {
  return std::exp(static_cast<double>(1 - n) / n + log_alpha_mismatch(spectrum, alpha, n));
}

// --- ladder --------------------------------------------------------------

double BoundReport::gap_plus_z0hat() const { return std::abs(root(log_z_plus) - root(log_z0_hat)); }

std::optional<double> BoundReport::gap_prime_fbar() const {
  if (!log_z_prime || !log_z_fbar) return std::nullopt;
  return std::abs(root(*log_z_prime) - root(*log_z_fbar));
}

std::optional<double> BoundReport::gap_plus_minus() const {
  if (!z_minus) return std::nullopt;
  return std::abs(root(log_z_plus) - root(z_minus->log_total));
}

BoundReport closed_form_bounds(std::int64_t N, int n, std::int64_t box_volume) {
  BoundReport r;
  r.N = N;
  r.n = n;
  r.box_volume = box_volume;
  r.log_z_plus = z_plus(N, n, box_volume);
  r.log_z0_hat = z0_hat(N, n).log_Z;
  r.z0 = z0_limit(n).Z0;
  return r;
}

BoundReport ladder_check(const Weighting& f, const Dissection& dis, double eps, const LadderOptions& opts) {
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
  const int n = f.tile_size();
  const auto N = f.lattice().size();
  BoundReport r = closed_form_bounds(N, n, dis.box_volume());
  r.box_edge = dis.box_edge();
  r.eps = eps;

  auto fbar = coarse_average(f, dis);

  try {
    r.log_z_prime = z_prime(fbar, opts.zprime);
  } catch (const BudgetExceeded& e) {
    r.notes.push_back(std::string("Z' skipped: ") + e.what());
  }

  if (dis.box_volume() % n == 0) {
    auto spectrum = build_mass_spectrum(fbar, eps, opts.cutoff, f.norm());
    auto alpha = choose_alpha(spectrum, dis.box_volume(), n, eps);
    auto factors = z_minus_lower(dis, n, spectrum, alpha);
    factors.log_total += opts.corrupt_lower_log;
    r.z_minus = factors;
    r.supertypes = spectrum.entries.size();
    r.Mbar = spectrum.Mbar;
    r.M = spectrum.M;
    r.alpha_feasible = alpha.feasible;
  } else {
    r.notes.push_back("Z- skipped: tile size does not divide box volume");
  }

  if (opts.compute_exact) {
    try {
      r.log_z_fbar = exact_partition(fbar, opts.exact).log_Z;
      r.log_z_f = exact_partition(f, opts.exact).log_Z;
    } catch (const BudgetExceeded& e) {
      r.notes.push_back(std::string("exact Z skipped: ") + e.what());
    }
  }

  std::optional<double> lower = r.z_minus ? std::optional<double>(r.z_minus->log_total) : std::nullopt;
  if (r.log_z_prime) {
    r.ordering_holds = log_leq_with_slack(*r.log_z_prime, r.log_z_plus);
    if (lower) r.ordering_holds = r.ordering_holds && log_leq_with_slack(*lower, *r.log_z_prime);
  } else if (lower) {
    r.ordering_holds = log_leq_with_slack(*lower, r.log_z_plus);
  }
  return r;
}

}  // namespace elastic
