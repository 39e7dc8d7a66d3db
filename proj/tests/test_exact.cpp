#include "doctest.h"

#include "elastic/errors.hpp"
#include "elastic/exact.hpp"
#include "oracles.hpp"

using namespace elastic;

TEST_CASE("constant weighting partition functions") {
  auto f4 = build_weighting(WeightingFamily::constant(), Lattice(1, 4), 2);
  CHECK(exact_partition(f4).Z() == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  auto f6 = build_weighting(WeightingFamily::constant(), Lattice(1, 6), 2);
  const auto r = exact_partition(f6, {Mode::rational, Policy::serial, kDefaultBudget});
  REQUIRE(r.exact_Z.has_value());
  CHECK(*r.exact_Z == Rational(3, 25));
}

TEST_CASE("tiling count") {
  CHECK(std::exp(log_tiling_count(6, 2)) == doctest::Approx(15.0));
  CHECK(std::exp(log_tiling_count(16, 2)) == doctest::Approx(2027025.0));
}

TEST_CASE("serial and parallel enumeration agree") {
  auto f = build_weighting(WeightingFamily::pair_exponential(1.5), Lattice(2, 4), 2);
  const auto par = exact_partition(f, {Mode::float_mode, Policy::parallel, kDefaultBudget});
  const auto ser = exact_partition(f, {Mode::float_mode, Policy::serial, kDefaultBudget});
  CHECK(par.log_Z == doctest::Approx(ser.log_Z).epsilon(1e-13));
  const auto g = oracle::pair_exponential({2, 4}, 2, 1.5);
  CHECK(ser.Z() == doctest::Approx(oracle::partition_function(16, 2, g)).epsilon(1e-11));
}

TEST_CASE("universal bound") {
  CHECK(universal_bound(4, 2).value() == doctest::Approx(std::pow(2.0, 0.25)).epsilon(1e-14));
  CHECK(z0_limit(2).Z0 == doctest::Approx(std::exp(-0.5)));
}

TEST_CASE("budget and mode limits") {
  auto f = build_weighting(WeightingFamily::constant(), Lattice(1, 8), 2);
  CHECK_THROWS_AS(exact_partition(f, {Mode::float_mode, Policy::parallel, 10.0}), BudgetExceeded);
  auto big = build_weighting(WeightingFamily::constant(), Lattice(1, 14), 2);
  CHECK_THROWS(exact_partition(big, {Mode::rational, Policy::serial, kDefaultBudget}));
  CHECK_THROWS(parse_mode("decimal"));
}

TEST_CASE("lemma 2 on a tilted pair") {
  auto f1 = build_weighting(WeightingFamily::pair_exponential(2.0), Lattice(1, 6), 2);
  auto f2 = tilted_weighting(f1, 0.02, 3);
  const auto rep = lemma2_gap_bound(f1, f2, 0.1);
  CHECK(rep.applicable);
  CHECK(rep.holds);
  CHECK(rep.gap <= rep.bound);
}

TEST_CASE("constant pressure approaches (1-n)/n") {
  // C fitted over n in {2,3,4}, N <= 1e5 (worst 1.1756 at n = 4, N = 8), then frozen.
  constexpr double C = 1.2;
  for (int n : {2, 3, 4}) {
    for (std::int64_t N = 2 * n; N <= 100000; N = N * 3 / 2 / n * n + n) {
      const double p = z0_hat(N, n).pressure;
      CHECK(std::abs(p - z0_limit(n).pressure) <= C * std::log(static_cast<double>(N)) / static_cast<double>(N));
    }
  }
}

TEST_CASE("single tile bound is 1") {
  CHECK(universal_bound(3, 3).value() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS(universal_bound(5, 2));
}

TEST_CASE("relabeling by a translation leaves Z unchanged") {
  const Lattice lat(1, 8);
  auto f = build_weighting(WeightingFamily::pair_exponential(2.0), lat, 2);
  const std::vector<std::int64_t> shift{3};
  const auto table = SubsetTable::build(8, 2, [&](std::span<const Vertex> s) { return f.log_value(s); });
  const auto shifted = SubsetTable::build(8, 2, [&](std::span<const Vertex> s) {
    std::vector<Vertex> moved;
    for (auto v : s) moved.push_back(lat.translate(v, shift));
    return f.log_value(moved);
  });
  CHECK(enumerate_tilings_serial(shifted) == doctest::Approx(enumerate_tilings_serial(table)).epsilon(1e-14));
}

TEST_CASE("rational and float modes agree") {
  auto f = build_weighting(WeightingFamily::constant(), Lattice(2, 2), 2);
  const auto r = exact_partition(f, {Mode::rational, Policy::serial, kDefaultBudget});
  const auto x = exact_partition(f, {Mode::float_mode, Policy::parallel, kDefaultBudget});
  REQUIRE(r.exact_Z.has_value());
  CHECK(r.exact_Z->convert_to<double>() == doctest::Approx(x.Z()).epsilon(1e-9));
}
