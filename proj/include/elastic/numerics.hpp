#ifndef ELASTIC_NUMERICS_HPP
#define ELASTIC_NUMERICS_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace elastic {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log(exp(a) + exp(b)), exact for -inf operands.
inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) {
    add(x);
    return *this;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// log(sum exp(x_i)) with the max factored out and a compensated inner sum.
double log_sum_exp(std::span<const double> logs);

/// Positive real stored as its natural log; zero is log_value == -inf.
class LogNum {
 public:
  LogNum() = default;
  static LogNum from_log(double log_value) { return LogNum(log_value); }
  static LogNum from_value(double value);
  static LogNum zero() { return LogNum(kNegInf); }
  static LogNum one() { return LogNum(0.0); }

  double log() const { return log_; }
  double value() const { return std::exp(log_); }
  bool is_zero() const { return log_ == kNegInf; }

  /// N-th root, the form every partition function is compared in.
  LogNum root(double n) const { return LogNum(log_ / n); }
  LogNum pow(double e) const { return is_zero() ? *this : LogNum(log_ * e); }

  LogNum operator*(LogNum o) const { return LogNum(log_ + o.log_); }
  LogNum operator/(LogNum o) const { return LogNum(log_ - o.log_); }
  LogNum operator+(LogNum o) const { return LogNum(log_add(log_, o.log_)); }
  LogNum& operator*=(LogNum o) { return *this = *this * o; }
  LogNum& operator+=(LogNum o) { return *this = *this + o; }

  auto operator<=>(const LogNum&) const = default;

 private:
  explicit LogNum(double l) : log_(l) {}
  double log_ = kNegInf;
};

/// ln r!, exact summation of ln k with compensation; values up to the
/// largest requested r are cached process-wide.
double log_factorial(std::int64_t r);

/// ln C(n, k); -inf when k is out of range.
double log_binomial(std::int64_t n, std::int64_t k);

/// Exact binomial coefficient, throws on overflow past 2^63.
std::int64_t binomial(std::int64_t n, std::int64_t k);

BigInt big_factorial(std::int64_t r);

/// Feller's bounds on r!/(r/e)^r: sqrt(2 pi r) < ratio < sqrt(2 pi r) e^{1/12r}.
struct StirlingSandwich {
  double log_lower;
  double log_value;
  double log_upper;
  double lower_margin;  // log_value - log_lower, evaluated in extended precision
  double upper_margin;  // log_upper - log_value, likewise

  double lower() const { return std::exp(log_lower); }
  double value() const { return std::exp(log_value); }
  double upper() const { return std::exp(log_upper); }
  bool strict() const { return lower_margin > 0.0 && upper_margin > 0.0; }
};

StirlingSandwich stirling_sandwich(std::int64_t r);

/// Dense row-major matrix used by the root estimate.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

struct RootEstimate {
  double A;          // (sum_i prod_j a_ij)^{1/N}
  double perturbed;  // (sum_i prod_j a_ij (1 + delta_ij))^{1/N}
  double lower;      // (1 - |min delta|) A
  double upper;      // (1 + |max delta|) A
  bool holds;
};

/// Evaluates both roots and checks the sandwich. Comparisons carry a
/// relative slack of 1e-12 for rounding; saturated cases sit on the bound.
RootEstimate root_estimate_check(const Matrix& a, const Matrix& delta);

/// Relative slack used wherever an analytic inequality is compared in
/// floating point.
inline constexpr double kRoundingSlack = 1e-12;

inline bool leq_with_slack(double lhs, double rhs) {
  return lhs <= rhs + kRoundingSlack * std::max(std::abs(lhs), std::abs(rhs));
}

/// Same in log space: absolute slack on logs is relative slack on values.
inline bool log_leq_with_slack(double log_lhs, double log_rhs) {
  if (log_lhs == kNegInf) return true;
  return log_lhs <= log_rhs + kRoundingSlack * std::max(1.0, std::abs(log_rhs));
}

}  // namespace elastic

#endif  // ELASTIC_NUMERICS_HPP
