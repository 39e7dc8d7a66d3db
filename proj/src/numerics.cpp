#include "elastic/numerics.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <mutex>
#include <numbers>

#include "elastic/errors.hpp"

namespace elastic {

double log_sum_exp(std::span<const double> logs) {
  double top = kNegInf;
  for (double x : logs) top = std::max(top, x);
  if (top == kNegInf) return kNegInf;
  if (std::isinf(top)) return top;
  CompensatedSum sum;
  for (double x : logs) {
    if (x != kNegInf) sum += std::exp(x - top);
  }
  return top + std::log(sum.value());
}

LogNum LogNum::from_value(double value) {
  if (value < 0.0 || std::isnan(value)) throw DomainError("LogNum holds nonnegative values only");
  return LogNum(value == 0.0 ? kNegInf : std::log(value));
}

namespace {

class FactorialTable {
 public:
  double get(std::int64_t r) {
    std::lock_guard lock(mutex_);
    if (static_cast<std::size_t>(r) >= logs_.size()) grow(r);
    return logs_[static_cast<std::size_t>(r)];
  }

 private:
  void grow(std::int64_t r) {
    auto k = static_cast<std::int64_t>(logs_.size());
    logs_.resize(static_cast<std::size_t>(r) + 1);
    for (; k <= r; ++k) {
      if (k >= 2) running_ += std::log(static_cast<double>(k));
      logs_[static_cast<std::size_t>(k)] = running_.value();
    }
  }

  std::mutex mutex_;
  std::vector<double> logs_;
  CompensatedSum running_;
};

// Past this size the table is not worth holding; ln r! from lgamma is
// accurate to a few ulps there.
constexpr std::int64_t kFactorialTableLimit = std::int64_t{1} << 22;

}  // namespace

double log_factorial(std::int64_t r) {
  if (r < 0) throw DomainError("log_factorial of a negative integer");
  if (r >= kFactorialTableLimit) return std::lgamma(static_cast<double>(r) + 1.0);
  static FactorialTable table;
  return table.get(r);
}

double log_binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n || n < 0) return kNegInf;
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

std::int64_t binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  BigInt acc = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    acc *= n - k + i;
    acc /= i;
  }
  if (acc > BigInt(std::numeric_limits<std::int64_t>::max())) {
    throw DomainError("binomial coefficient overflows 64 bits");
  }
  return acc.convert_to<std::int64_t>();
}

BigInt big_factorial(std::int64_t r) {
  BigInt acc = 1;
  for (std::int64_t k = 2; k <= r; ++k) acc *= k;
  return acc;
}

StirlingSandwich stirling_sandwich(std::int64_t r) {
  if (r < 1) throw DomainError("stirling_sandwich needs r >= 1");
  // The upper gap shrinks like 1/(360 r^3), below double resolution of the
  // logs for large r, so the margins are formed in 50 digits.
  using Wide = boost::multiprecision::cpp_bin_float_50;
  const Wide rw(r);
  const Wide lower = log(2 * boost::math::constants::pi<Wide>() * rw) / 2;
  const Wide upper = lower + 1 / (12 * rw);
  const Wide value = boost::math::lgamma(rw + 1) - rw * (log(rw) - 1);
  StirlingSandwich out{};
  out.log_lower = lower.convert_to<double>();
  out.log_upper = upper.convert_to<double>();
  out.log_value = value.convert_to<double>();
  out.lower_margin = Wide(value - lower).convert_to<double>();
  out.upper_margin = Wide(upper - value).convert_to<double>();
  return out;
}

RootEstimate root_estimate_check(const Matrix& a, const Matrix& delta) {
  if (a.rows != delta.rows || a.cols != delta.cols) throw DomainError("root estimate: shape mismatch");
  if (a.rows == 0 || a.cols == 0) throw DomainError("root estimate: empty matrix");
  double dmax = -1.0;
  double dmin = 1.0;
  for (std::size_t k = 0; k < a.data.size(); ++k) {
    if (a.data[k] < 0.0) throw DomainError("root estimate: negative entry");
    double d = delta.data[k];
    if (!(std::abs(d) <= 1.0)) throw DomainError("root estimate: |delta| > 1");
    dmax = std::max(dmax, d);
    dmin = std::min(dmin, d);
  }
  std::vector<double> plain(a.rows);
  std::vector<double> pert(a.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    CompensatedSum lp;
    CompensatedSum lq;
    bool zero_p = false;
    bool zero_q = false;
    for (std::size_t j = 0; j < a.cols; ++j) {
      double x = a(i, j);
      double y = x * (1.0 + delta(i, j));
      if (x == 0.0) zero_p = true; else lp += std::log(x);
      if (y == 0.0) zero_q = true; else lq += std::log(y);
    }
    plain[i] = zero_p ? kNegInf : lp.value();
    pert[i] = zero_q ? kNegInf : lq.value();
  }
  const double n = static_cast<double>(a.cols);
  RootEstimate out{};
  out.A = std::exp(log_sum_exp(plain) / n);
  out.perturbed = std::exp(log_sum_exp(pert) / n);
  out.lower = (1.0 - std::abs(dmin)) * out.A;
  out.upper = (1.0 + std::abs(dmax)) * out.A;
  out.holds = leq_with_slack(out.lower, out.perturbed) && leq_with_slack(out.perturbed, out.upper);
  return out;
}

}  // namespace elastic
