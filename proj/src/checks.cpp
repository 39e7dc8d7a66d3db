#include "elastic/checks.hpp"

#include <cmath>
#include <random>

#include "elastic/conditions.hpp"
#include "elastic/exact.hpp"
#include "elastic/ladder.hpp"
#include "elastic/weighting.hpp"

namespace elastic {

namespace {

struct Instance {
  int d;
  std::int64_t L;
  int n;
};

constexpr Instance kInstances[] = {{1, 4, 2}, {1, 6, 2}, {1, 6, 3}, {1, 8, 2}, {2, 4, 2}, {1, 8, 4}};

void record(CheckResult& r, double violation, bool failed) {
  ++r.cases;
  if (failed) ++r.failures;
  if (std::isnan(violation)) {
    r.worst = violation;
  } else if (!std::isnan(r.worst)) {
    r.worst = std::max(r.worst, violation);
  }
}

Weighting random_pair_exp(const Instance& in, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> scale(0.5, 16.0);
  const auto norm = rng() % 2 == 0 ? Norm::euclidean : Norm::linf;
  return build_weighting(WeightingFamily::pair_exponential(scale(rng), norm), Lattice(in.d, in.L), in.n);
}

}  // namespace

std::vector<CheckResult> run_property_checks(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<CheckResult> out;

  CheckResult norm{"normalization_residual"};
  CheckResult mass{"placement_mass"};
  CheckResult lemma1{"lemma1_universal_bound"};
  CheckResult kernels{"serial_parallel_agreement"};
  for (int rep = 0; rep < 4; ++rep) {
    for (const auto& in : kInstances) {
      auto f = random_pair_exp(in, rng);
      const auto N = f.lattice().size();
      double worst = 0.0;
      for (Vertex v = 0; v < N; ++v) worst = std::max(worst, f.normalization_residual(v));
      record(norm, worst, worst > 1e-10);
      const double pm = placement_mass(f).value;
      const double target = static_cast<double>(N) / in.n;
      const double rel = std::abs(pm - target) / target;
      record(mass, rel, rel > 1e-9);
      auto par = exact_partition(f, {Mode::float_mode, Policy::parallel, kDefaultBudget});
      auto ser = exact_partition(f, {Mode::float_mode, Policy::serial, kDefaultBudget});
      const double bound = universal_bound(N, in.n).value();
      record(lemma1, par.root() - bound, !leq_with_slack(par.root(), bound));
      const double diff = std::abs(par.log_Z - ser.log_Z);
      record(kernels, diff, diff > 1e-12 * std::max(1.0, std::abs(ser.log_Z)));
    }
  }
  out.insert(out.end(), {norm, mass, lemma1, kernels});

  CheckResult constant{"constant_closed_form"};
  for (const auto& in : kInstances) {
    auto f = build_weighting(WeightingFamily::constant(), Lattice(in.d, in.L), in.n);
    const auto z = exact_partition(f);
    const auto z0 = z0_hat(f.lattice().size(), in.n);
    const double rel = std::abs(std::expm1(z.log_Z - z0.log_Z));
    record(constant, rel, rel > 1e-10);
  }
  out.push_back(constant);

  CheckResult root{"root_estimate"};
  std::uniform_int_distribution<int> dim(1, 8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    Matrix a(static_cast<std::size_t>(dim(rng)), static_cast<std::size_t>(dim(rng)));
    Matrix delta(a.rows, a.cols);
    for (auto& x : a.data) x = 2.0 * unit(rng);
    for (auto& x : delta.data) x = 2.0 * unit(rng) - 1.0;
    auto r = root_estimate_check(a, delta);
    record(root, std::max(r.lower - r.perturbed, r.perturbed - r.upper), !r.holds);
  }
  out.push_back(root);

  CheckResult stirling{"stirling_sandwich"};
  for (std::int64_t r = 1; r <= 10000; ++r) {
    auto s = stirling_sandwich(r);
    record(stirling, -std::min(s.lower_margin, s.upper_margin), !s.strict());
  }
  out.push_back(stirling);

  CheckResult lemma3{"lemma3_pointwise"};
  CheckResult completeness{"supertype_mass_completeness"};
  CheckResult ladder{"ladder_ordering"};
  for (std::int64_t box_edge : {2, 4}) {
    for (double scale : {16.0, 32.0, 64.0}) {
      Lattice lat(1, 8);
      Dissection dis(lat, box_edge);
      auto f = build_weighting(WeightingFamily::pair_exponential(scale), lat, 2);
      auto rep = lemma3_check(f, dis);
      record(lemma3, rep.vacuous ? 0.0 : rep.worst_ratio - rep.bound, !rep.vacuous && !rep.holds);
      auto fbar = coarse_average(f, dis);
      auto spectrum = build_mass_spectrum(fbar, 0.1);
      const double gap = std::abs(spectrum.enumerated_mass - 1.0);
      record(completeness, gap, gap > 1e-9);
      LadderOptions opts;
      opts.compute_exact = false;
      auto b = ladder_check(f, dis, 0.1, opts);
      record(ladder, 0.0, !b.ordering_holds);
    }
  }
  out.insert(out.end(), {lemma3, completeness, ladder});

  CheckResult alpha{"alpha_contract"};
  for (int rep = 0; rep < 100; ++rep) {
    const auto k = static_cast<std::size_t>(1 + rng() % 6);
    std::vector<double> raw(k);
    double total = 0.0;
    for (auto& x : raw) total += (x = 0.05 + unit(rng));
    std::vector<MassEntry> entries;
    for (std::size_t i = 0; i < k; ++i) entries.push_back({Supertype{{static_cast<std::int64_t>(i)}}, raw[i] / total});
    const double eps = 0.05 + 0.45 * unit(rng);
    auto spectrum = make_mass_spectrum(entries, eps);
    const int n = 2;
    const auto nbar = n * (static_cast<std::int64_t>(200.0 * spectrum.Mbar / (eps * eps)) + 1 +
                           static_cast<std::int64_t>(rng() % 50));
    auto a = choose_alpha(spectrum, nbar, n, eps);
    auto c = check_alpha(spectrum, a, eps);
    record(alpha, 0.0, !(a.feasible && c.on_grid && c.sums_to_one && c.close));
  }
  out.push_back(alpha);

  CheckResult cond{"conditions_monotone"};
  for (int n : {2, 3}) {
    for (int d : {1, 2}) {
      const auto report = verify_conditions(conditions_params(0.1, 0.1, d, n));
      if (!report.threshold) {
        record(cond, 1.0, true);
        continue;
      }
      bool ok = true;
      for (double f = 1.0; f > 1e-6; f *= 0.5) {
        ok = ok && substituted_conditions_hold(0.1, 0.1, d, n, std::log(*report.threshold * f));
      }
      record(cond, 0.0, !ok);
    }
  }
  out.push_back(cond);
  return out;
}

}  // namespace elastic
