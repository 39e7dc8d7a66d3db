#ifndef ELASTIC_ERRORS_HPP
#define ELASTIC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace elastic {

/// Bad argument: invalid vertex id, divisibility failure, out-of-range parameter.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An instance whose enumeration cost exceeds the configured budget.
class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(const std::string& what, double log10_estimate)
      : std::runtime_error(what), log10_estimate_(log10_estimate) {}

  double log10_estimate() const { return log10_estimate_; }

 private:
  double log10_estimate_;
};

/// A computed result contradicts a theorem the code relies on. Always a bug.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace elastic

#endif  // ELASTIC_ERRORS_HPP
