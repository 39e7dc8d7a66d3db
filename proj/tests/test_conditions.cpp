#include "doctest.h"

#include <cmath>

#include "elastic/conditions.hpp"

using namespace elastic;

TEST_CASE("exponents") {
  const auto e = conditions_exponents(0.1, 1, 2);
  CHECK(e.sm == doctest::Approx(2 + 1 + 2 + 7 * 0.1));
  CHECK(e.nbar == doctest::Approx(-(2 + 2 + 6 * 0.1)));
  CHECK(e.Mbar == doctest::Approx(-(2 + 4 * 0.1)));
}

TEST_CASE("parameters at eps = s = 0.1, d = 1, n = 2") {
  const auto p = conditions_params(0.1, 0.1, 1, 2);
  REQUIRE(p.nbar.has_value());
  REQUIRE(p.Mbar.has_value());
  CHECK(*p.nbar == 39811);
  CHECK(*p.Mbar == 251);
  CHECK(*p.box_edge == 39811);
}

TEST_CASE("the scaling identity") {
  for (double eb : {0.1, 0.01, 1e-4}) {
    const auto r = verify_conditions(conditions_params(0.1, 0.2, 2, 3, eb));
    CHECK(r.log_scaling_identity == doctest::Approx(-0.2 * std::log(eb)).epsilon(1e-12));
  }
}

TEST_CASE("conditions fail at eps_bar = eps and hold below the threshold") {
  const auto r = verify_conditions(conditions_params(0.1, 0.1, 1, 2));
  CHECK_FALSE(r.all_hold);
  REQUIRE(r.threshold.has_value());
  CHECK(*r.threshold == doctest::Approx(std::pow(400.0, -5.0)).epsilon(1e-6));
  CHECK(substituted_conditions_hold(0.1, 0.1, 1, 2, std::log(*r.threshold * 0.5)));
  CHECK_FALSE(substituted_conditions_hold(0.1, 0.1, 1, 2, std::log(*r.threshold * 2.0)));
}

TEST_CASE("tail mass with every supertype kept") {
  const Lattice lat(1, 8);
  const Dissection dis(lat, 2);
  auto f = build_weighting(WeightingFamily::pair_exponential(1.0), lat, 2);
  const auto fbar = coarse_average(f, dis);
  const auto s = build_mass_spectrum(fbar, 0.1);
  const auto t = tail_mass_check(fbar, s, 0.1, decay_radius(f), std::numeric_limits<double>::infinity());
  CHECK(t.enumerated_mass == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t.truncated_mass <= 1e-12);
  CHECK(t.envelope_holds);
}
