#ifndef ELASTIC_CHECKS_HPP
#define ELASTIC_CHECKS_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace elastic {

struct CheckResult {
  std::string name;
  std::int64_t cases = 0;
  std::int64_t failures = 0;
  double worst = 0.0;  // largest observed violation measure (check specific)
};

/// Seeded randomized invariant suites over desk-scale instances. Every check
/// is a theorem or an identity, so any failure is a bug.
std::vector<CheckResult> run_property_checks(std::uint64_t seed);

}  // namespace elastic

#endif  // ELASTIC_CHECKS_HPP
