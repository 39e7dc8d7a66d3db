#include "doctest.h"

#include <cmath>
#include <vector>

#include "elastic/numerics.hpp"

using namespace elastic;

TEST_CASE("log_add and log_sum_exp") {
  CHECK(log_add(kNegInf, 1.5) == 1.5);
  CHECK(log_add(std::log(2.0), std::log(3.0)) == doctest::Approx(std::log(5.0)));
  const std::vector<double> big{1000.0, 1000.0};
  CHECK(log_sum_exp(big) == doctest::Approx(1000.0 + std::log(2.0)));
  const std::vector<double> none{kNegInf, kNegInf};
  CHECK(log_sum_exp(none) == kNegInf);
}

TEST_CASE("factorials and binomials") {
  CHECK(log_factorial(0) == 0.0);
  CHECK(log_factorial(10) == doctest::Approx(std::log(3628800.0)));
  CHECK(binomial(10, 3) == 120);
  CHECK(binomial(5, 6) == 0);
  CHECK(log_binomial(5, 6) == kNegInf);
  CHECK(big_factorial(25).str() == "15511210043330985984000000");
}

TEST_CASE("LogNum arithmetic") {
  auto a = LogNum::from_value(2.0);
  auto b = LogNum::from_value(6.0);
  CHECK((a * b).value() == doctest::Approx(12.0));
  CHECK((a + b).value() == doctest::Approx(8.0));
  CHECK(b.root(2.0).value() == doctest::Approx(std::sqrt(6.0)));
  CHECK(LogNum::zero().is_zero());
}

TEST_CASE("Stirling sandwich at r = 5") {
  const auto s = stirling_sandwich(5);
  CHECK(s.value() == doctest::Approx(5.69907).epsilon(1e-5));
  CHECK(s.lower() == doctest::Approx(5.60499).epsilon(1e-5));
  CHECK(s.upper() == doctest::Approx(5.699191).epsilon(1e-6));
  CHECK(s.strict());
  CHECK(stirling_sandwich(10000).strict());
}

TEST_CASE("root estimate") {
  Matrix a(2, 2, 1.0);
  Matrix delta(2, 2, 0.25);
  const auto r = root_estimate_check(a, delta);
  CHECK(r.A == doctest::Approx(std::sqrt(2.0)));
  CHECK(r.perturbed == doctest::Approx(1.25 * std::sqrt(2.0)));
  CHECK(r.holds);
}

TEST_CASE("compensated sum") {
  CompensatedSum s;
  s += 1.0;
  for (int i = 0; i < 1000; ++i) s += 1e-16;
  CHECK(s.value() == doctest::Approx(1.0 + 1e-13).epsilon(1e-15));
}
