#include "elastic/conditions.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "elastic/errors.hpp"

namespace elastic {

namespace {

// Largest log value we round to an integer.
constexpr double kMaxRoundLog = 43.0;  // about 4.7e18

std::optional<std::int64_t> nearest_integer(double log_value) {
  if (log_value > kMaxRoundLog) return std::nullopt;
  return std::max<std::int64_t>(1, std::llround(std::exp(log_value)));
}

std::optional<std::int64_t> nearest_power_base(double log_value, int d) {
  if (log_value > kMaxRoundLog) return std::nullopt;
  const double target = std::exp(log_value);
  auto base = std::max<std::int64_t>(1, std::llround(std::exp(log_value / d)));
  auto best = base;
  double best_err = std::abs(std::pow(static_cast<double>(base), d) - target);
  for (auto c : {base - 1, base + 1}) {
    if (c < 1) continue;
    double err = std::abs(std::pow(static_cast<double>(c), d) - target);
    if (err < best_err) {
      best = c;
      best_err = err;
    }
  }
  return best;
}

double log_stirling_lhs(double log_nbar) { return std::log(0.5 * std::log(2.0 * std::numbers::pi) + 0.5 * log_nbar + 1.0 / 12.0); }

InequalityResult make(std::string name, std::string statement, double lhs, double rhs, bool strict) {
  bool holds = strict ? lhs < rhs : log_leq_with_slack(lhs, rhs);
  return {std::move(name), std::move(statement), lhs, rhs, holds};
}

void validate(double eps, double s, int d, int n, double eps_bar) {
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
  if (!(s > 0.0)) throw DomainError("s must be positive");
  if (d < 1 || n < 1) throw DomainError("d and n must be positive");
  if (!(eps_bar > 0.0) || eps_bar > eps) throw DomainError("eps_bar must lie in (0, eps]");
}

// The three continuous-form inequalities, in log space.
std::vector<InequalityResult> substituted(double eps, double s, int d, int n, double log_eb) {
  const auto ex = conditions_exponents(s, d, n);
  const double log_nbar = ex.nbar * log_eb;
  const double log_Mbar = ex.Mbar * log_eb;
  std::vector<InequalityResult> out;
  out.push_back(make("substituted_grid", "200 n < eps_bar^{-2sd}", std::log(200.0 * n), -2.0 * s * d * log_eb, true));
  out.push_back(make("substituted_stirling",
                     "ln(2pi)/2 + ln(nbar)/2 + 1/12 <= eps_bar nbar / (10 Mbar)", log_stirling_lhs(log_nbar),
                     log_eb + log_nbar - log_Mbar - std::log(10.0), false));
  const double log_alpha = std::log(static_cast<double>(d) * n) + (1.0 + s) * log_eb;
  double lhs = log_alpha >= 0.0 ? std::numeric_limits<double>::infinity() : log_alpha - std::log1p(-std::exp(log_alpha));
  out.push_back(make("lemma3", "alpha / (1 - alpha) <= eps, alpha = d n eps_bar^{1+s}", lhs, std::log(eps), false));
  return out;
}

}  // namespace

ConditionsExponents conditions_exponents(double s, int d, int n) {
  const double dd = d;
  const double nn = n;
  return {nn + 1.0 + 2.0 / dd + (2.0 * nn + 3.0) * s, -(nn * dd + 2.0 + 2.0 * (nn + 1.0) * s * dd),
          -(nn * dd + 2.0 * nn * dd * s)};
}

ConditionsParams conditions_params(double eps, double s, int d, int n, double eps_bar, double c1) {
  validate(eps, s, d, n, eps_bar);
  if (!(c1 > 0.0)) throw DomainError("c1 must be positive");
  ConditionsParams p;
  p.eps = eps;
  p.s = s;
  p.eps_bar = eps_bar;
  p.d = d;
  p.n = n;
  p.c1 = c1;
  p.exponents = conditions_exponents(s, d, n);
  const double le = std::log(eps_bar);
  p.log_sm_target = p.exponents.sm * le;
  p.log_nbar_target = p.exponents.nbar * le;
  p.log_Mbar_target = p.exponents.Mbar * le;
  p.box_edge = nearest_power_base(p.log_nbar_target, d);
  if (p.box_edge) {
    double v = std::pow(static_cast<double>(*p.box_edge), d);
    if (v < 9.2e18) p.nbar = static_cast<std::int64_t>(std::llround(v));
  }
  p.Mbar = nearest_integer(p.log_Mbar_target);
  p.log_R_max = std::log(c1) - p.log_sm_target;
  p.log_alpha = std::log(static_cast<double>(d) * n) + (1.0 + s) * le;
  return p;
}

ConditionsParams conditions_params(double eps, double s, int d, int n) { return conditions_params(eps, s, d, n, eps); }

bool substituted_conditions_hold(double eps, double s, int d, int n, double log_eps_bar) {
  for (const auto& r : substituted(eps, s, d, n, log_eps_bar)) {
    if (!r.holds) return false;
  }
  return true;
}

ConditionsReport verify_conditions(const ConditionsParams& p) {
  ConditionsReport r;
  r.params = p;
  const double log_nbar = p.nbar ? std::log(static_cast<double>(*p.nbar)) : p.log_nbar_target;
  const double log_Mbar = p.Mbar ? std::log(static_cast<double>(*p.Mbar)) : p.log_Mbar_target;
  r.inequalities.push_back(make("grid", "200 Mbar n / eps^2 < nbar",
                                std::log(200.0 * p.n) + log_Mbar - 2.0 * std::log(p.eps), log_nbar, true));
  r.inequalities.push_back(make("stirling", "ln(2pi)/2 + ln(nbar)/2 + 1/12 <= nbar eps / (10 Mbar)",
                                log_stirling_lhs(log_nbar), log_nbar + std::log(p.eps) - log_Mbar - std::log(10.0),
                                false));
  for (auto& x : substituted(p.eps, p.s, p.d, p.n, std::log(p.eps_bar))) r.inequalities.push_back(std::move(x));
  r.all_hold = true;
  for (const auto& x : r.inequalities) r.all_hold = r.all_hold && x.holds;

  // Bisection on ln eps_bar between a passing floor and eps.
  const double hi0 = std::log(p.eps);
  const double lo0 = -700.0;
  if (substituted_conditions_hold(p.eps, p.s, p.d, p.n, hi0)) {
    r.threshold = p.eps;
  } else if (substituted_conditions_hold(p.eps, p.s, p.d, p.n, lo0)) {
    double lo = lo0;
    double hi = hi0;
    for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(lo)); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (substituted_conditions_hold(p.eps, p.s, p.d, p.n, mid)) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    r.threshold = std::exp(lo);
  }

  r.log_scaling_identity =
      p.log_Mbar_target / (static_cast<double>(p.n) * p.d) + p.log_nbar_target / p.d + p.log_sm_target;
  return r;
}

TailMassReport tail_mass_check(const CoarseWeighting& fbar, const MassSpectrum& spectrum, double eps,
                               double decay_radius, double cutoff) {
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
  const auto& dis = fbar.dissection();
  const auto norm = fbar.base().norm();
  TailMassReport t{};
  t.Mbar = spectrum.Mbar;
  t.kept_mass = spectrum.prefix_mass(spectrum.Mbar);
  t.kept_M_mass = spectrum.prefix_mass(spectrum.M);
  t.enumerated_mass = spectrum.enumerated_mass;
  t.deficit = std::max(0.0, 1.0 - t.kept_mass);
  t.truncated_mass = std::max(0.0, 1.0 - t.enumerated_mass);
  t.prefix_holds = t.kept_mass > 1.0 - eps / 20.0;
  t.Mbar_found = t.prefix_holds;
  t.kept_holds = t.kept_M_mass > 1.0 - eps / 10.0;

  const double c = norm == Norm::euclidean ? std::sqrt(static_cast<double>(dis.lattice().dim())) : 1.0;
  const double slack = static_cast<double>(dis.box_edge() - 1) * c;
  CompensatedSum env;
  bool any_excluded = false;
  bool unbounded = false;
  for (const auto& type : enumerate_supertypes(dis, fbar.tile_size(), std::numeric_limits<double>::infinity(), norm)) {
    const double D = supertype_radius(type, dis, norm);
    if (D <= cutoff * (1.0 + 1e-12)) continue;
    any_excluded = true;
    const double count = static_cast<double>(covered_count(type, dis));
    if (std::isinf(decay_radius)) {
      unbounded = true;
      continue;
    }
    env += count * std::exp(-std::max(0.0, D - slack) / decay_radius);
  }
  t.envelope = !any_excluded ? 0.0 : unbounded ? std::numeric_limits<double>::infinity() : env.value();
  t.envelope_holds = leq_with_slack(t.truncated_mass, t.envelope) || t.truncated_mass < 1e-12;
  return t;
}

}  // namespace elastic
