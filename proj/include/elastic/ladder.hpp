#ifndef ELASTIC_LADDER_HPP
#define ELASTIC_LADDER_HPP

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "elastic/exact.hpp"
#include "elastic/lattice.hpp"
#include "elastic/numerics.hpp"
#include "elastic/weighting.hpp"

namespace elastic {

// The approximate partition functions all come from one proto-sum over
// ordered sequences (S_1, ..., S_{N/n}) of n-subsets:
//
//   Z*(fbar) = 1/(N/n)! * sum* prod_i fbar(S_i) * (nbar! / nbar^nbar)^Nbar
//
// Z+ keeps every sequence, Z' keeps the sequences whose vertex count in every
// box is exactly nbar, and Z- is a structured sub-sum of Z' for which only a
// lower bound F1 F2 F3 F4 F5 is computed.

/// ln Z+ from the closed form; independent of fbar because each set-sum
/// collapses to N/n.
double z_plus(std::int64_t N, int n, std::int64_t box_volume);
double z_plus(const Dissection& dis, int n);

struct ZPrimeOptions {
  std::int64_t max_boxes = 4;
  std::int64_t max_states = 2'000'000;  // occupancy vectors held by the DP
};

/// ln Z', by dynamic programming over box-occupancy vectors: a set with
/// per-box counts r contributes fbar(r) * prod_j C(nbar, r_j), and the
/// admissible sequences are the coefficient of x^(nbar,...,nbar) in the
/// (N/n)-th power of the per-set generating function.
double z_prime(const CoarseWeighting& fbar, const ZPrimeOptions& opts = {});

/// Per-box vertex counts of a list of sets.
std::vector<std::int64_t> occupancy_vector(std::span<const std::vector<Vertex>> sets, const Dissection& dis);

/// Translation class of a pointed superset. The pointed box is translated to
/// box 0; the rest is the sorted multiset of the other n-1 box ids.
struct Supertype {
  std::vector<std::int64_t> rest_boxes;
  auto operator<=>(const Supertype&) const = default;
};

struct Superset {
  std::int64_t pointed_box;
  std::vector<std::int64_t> rest_boxes;
};

Supertype supertype_of(const Superset& s, const Dissection& dis);

/// Largest minimal-image distance between the pointed box centre and a
/// rest box centre, in lattice units.
double supertype_radius(const Supertype& t, const Dissection& dis, Norm norm = Norm::euclidean);

/// All supertypes with supertype_radius <= cutoff, in ascending rest_boxes order.
std::vector<Supertype> enumerate_supertypes(const Dissection& dis, int n, double cutoff,
                                            Norm norm = Norm::euclidean);

/// Number of pointed sets at a fixed point of box 0 covered by the supertype.
std::int64_t covered_count(const Supertype& t, const Dissection& dis);

/// a_k: sum of fbar over pointed sets at a fixed point covered by the supertype.
double supertype_mass(const CoarseWeighting& fbar, const Supertype& t);

struct MassEntry {
  Supertype type;
  double mass;
};

struct MassSpectrum {
  std::vector<MassEntry> entries;  // descending mass, ties by supertype order
  std::size_t Mbar = 0;            // shortest prefix with mass > 1 - eps/20 (all if none)
  std::size_t M = 0;               // kept prefix: masses above eps/(20 Mbar)
  double enumerated_mass = 0.0;
  double eps = 0.0;

  double prefix_mass(std::size_t count) const;
};

MassSpectrum build_mass_spectrum(const CoarseWeighting& fbar, double eps,
                                 double cutoff = std::numeric_limits<double>::infinity(),
                                 Norm norm = Norm::euclidean);
/// Orders, truncates and thresholds an already computed list of masses.
MassSpectrum make_mass_spectrum(std::vector<MassEntry> entries, double eps);

struct AlphaEntry {
  std::size_t index;   // position in the spectrum
  std::int64_t count;  // alpha * nbar / n, an integer
  Rational alpha;
  Rational ideal;      // a_k / sum_{j<=M} a_j
};

struct AlphaAssignment {
  std::vector<AlphaEntry> entries;  // one per kept supertype; the rest are 0
  std::int64_t per_box = 0;         // nbar / n
  Rational grid;                    // n / nbar
  bool feasible = false;            // nbar > 200 Mbar n / eps^2 held
};

/// Rounds the ideal proportions onto the grid of multiples of n/nbar by
/// pairwise transfers: the off-grid value nearest its lower grid point and
/// the one nearest its upper grid point move toward those points together,
/// so the total stays 1 and no value leaves its starting grid cell.
AlphaAssignment choose_alpha(const MassSpectrum& spectrum, std::int64_t nbar, int n, double eps);

struct AlphaContract {
  bool on_grid;      // every alpha * nbar / n is an integer
  bool sums_to_one;
  bool close;        // |alpha_k - ideal_k| <= (eps/10) a_k for every kept k
};

/// Exact rational evaluation of the three contract conditions.
AlphaContract check_alpha(const MassSpectrum& spectrum, const AlphaAssignment& alpha, double eps);

/// sum_k (alpha_k / n) ln(a_k / alpha_k); compared against -eps/(4n).
double log_alpha_mismatch(const MassSpectrum& spectrum, const AlphaAssignment& alpha, int n);

struct ZMinusFactors {
  std::array<double, 5> log_F{};
  double log_total = 0.0;
};

/// Closed-form lower bound on ln Z-.
ZMinusFactors z_minus_lower(const Dissection& dis, int n, const MassSpectrum& spectrum,
                            const AlphaAssignment& alpha);

/// The Stirling-approximated form of the bound (per-root): e^{(1-n)/n} prod (a/alpha)^{alpha/n}.
double approx_root_lower(const MassSpectrum& spectrum, const AlphaAssignment& alpha, int n);

struct LadderOptions {
  ExactOptions exact;
  ZPrimeOptions zprime;
  double cutoff = std::numeric_limits<double>::infinity();
  bool compute_exact = true;
  /// Test hook: added to ln Z- before the ordering check.
  double corrupt_lower_log = 0.0;
};

struct BoundReport {
  std::int64_t N = 0;
  int n = 0;
  std::int64_t box_edge = 0;
  std::int64_t box_volume = 0;
  double eps = 0.0;

  double log_z_plus = 0.0;
  std::optional<double> log_z_prime;
  std::optional<ZMinusFactors> z_minus;
  std::optional<double> log_z_fbar;  // exact Z(fbar)
  std::optional<double> log_z_f;     // exact Z(f)
  double log_z0_hat = 0.0;
  double z0 = 0.0;                   // e^{(1-n)/n}

  std::size_t supertypes = 0;
  std::size_t Mbar = 0;
  std::size_t M = 0;
  bool alpha_feasible = false;

  bool ordering_holds = true;
  std::vector<std::string> notes;    // rungs skipped and why

  double root(double log_value) const { return std::exp(log_value / static_cast<double>(N)); }
  /// |Z+^{1/N} - Zhat0^{1/N}|
  double gap_plus_z0hat() const;
  /// |Z'^{1/N} - Z(fbar)^{1/N}|, when both were computed
  std::optional<double> gap_prime_fbar() const;
  /// |Z+^{1/N} - Z-^{1/N}| using the lower bound
  std::optional<double> gap_plus_minus() const;
};

/// Fills every rung that fits its budget and checks Z+ >= Z' >= lower(Z-).
BoundReport ladder_check(const Weighting& f, const Dissection& dis, double eps, const LadderOptions& opts = {});

/// Closed forms only: Z+ against Zhat0 at sizes far beyond enumeration.
BoundReport closed_form_bounds(std::int64_t N, int n, std::int64_t box_volume);

}  // namespace elastic

#endif  // ELASTIC_LADDER_HPP
