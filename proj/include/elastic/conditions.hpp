#ifndef ELASTIC_CONDITIONS_HPP
#define ELASTIC_CONDITIONS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "elastic/ladder.hpp"
#include "elastic/weighting.hpp"

namespace elastic {

/// Exponents of eps_bar in the parameter choices.
struct ConditionsExponents {
  double sm;    // n + 1 + 2/d + (2n + 3) s
  double nbar;  // -(nd + 2 + 2(n + 1) s d)
  double Mbar;  // -(nd + 2 n d s)
};

ConditionsExponents conditions_exponents(double s, int d, int n);

struct ConditionsParams {
  double eps = 0.0;
  double s = 0.0;
  double eps_bar = 0.0;
  int d = 1;
  int n = 1;
  double c1 = 1.0;

  ConditionsExponents exponents{};
  double log_sm_target = 0.0;
  double log_nbar_target = 0.0;  // continuous value
  double log_Mbar_target = 0.0;
  /// Rounded values, present when they fit in 64 bits.
  std::optional<std::int64_t> box_edge;  // nbar = box_edge^d
  std::optional<std::int64_t> nbar;
  std::optional<std::int64_t> Mbar;
  double log_R_max = 0.0;   // ln(c1 / sm_target)
  double log_alpha = 0.0;   // ln(d n eps_bar^{1+s})

  double sm_target() const { return std::exp(log_sm_target); }
};

ConditionsParams conditions_params(double eps, double s, int d, int n, double eps_bar, double c1 = 1.0);
/// eps_bar defaults to eps.
ConditionsParams conditions_params(double eps, double s, int d, int n);

struct InequalityResult {
  std::string name;
  std::string statement;
  double log_lhs;
  double log_rhs;
  bool holds;
};

struct ConditionsReport {
  ConditionsParams params;
  std::vector<InequalityResult> inequalities;
  bool all_hold = false;
  /// Largest eps_bar (with eps, s, d, n fixed) at which every substituted
  /// inequality holds, found by bisection on ln eps_bar.
  std::optional<double> threshold;
  /// ln(Mbar^{1/nd} box_edge sm) from the continuous targets; equals -s ln eps_bar.
  double log_scaling_identity = 0.0;
};

/// Evaluates, in log space:
///   grid:      200 Mbar n / eps^2 < nbar
///   stirling:  ln(2 pi)/2 + ln(nbar)/2 + 1/12 <= nbar eps / (10 Mbar)
///   substituted grid:     200 n < eps_bar^{-2sd}
///   substituted stirling: the same bound with the continuous targets and eps_bar
///   lemma3:    alpha / (1 - alpha) <= eps with alpha = d n eps_bar^{1+s}
/// The first two use the rounded integers when available.
ConditionsReport verify_conditions(const ConditionsParams& p);

/// Only the continuous-form inequalities, as a function of eps_bar.
bool substituted_conditions_hold(double eps, double s, int d, int n, double log_eps_bar);

struct TailMassReport {
  double kept_mass;        // sum of the Mbar largest masses
  double kept_M_mass;      // sum of the M largest masses
  double enumerated_mass;  // sum over supertypes within the cutoff
  double deficit;          // 1 - kept_mass, clamped at 0
  double truncated_mass;   // 1 - enumerated_mass, clamped at 0
  double envelope;         // bound on truncated_mass from the decay radius
  std::size_t Mbar;
  bool Mbar_found;         // some prefix exceeded 1 - eps/20
  bool prefix_holds;       // kept_mass > 1 - eps/20
  bool kept_holds;         // M-prefix mass > 1 - eps/10
  bool envelope_holds;     // truncated_mass <= envelope
};

/// Tail of the supertype masses beyond the cutoff radius. The envelope sums,
/// over every excluded supertype, its covered count times
/// exp(-max(0, D - (box_edge - 1) c) / R), where D is the supertype radius
/// and c is sqrt(d) (euclidean) or 1 (linf).
TailMassReport tail_mass_check(const CoarseWeighting& fbar, const MassSpectrum& spectrum, double eps,
                               double decay_radius, double cutoff);

}  // namespace elastic

#endif  // ELASTIC_CONDITIONS_HPP
