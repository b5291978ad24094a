#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace mdm {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log(e^a + e^b) without overflow.
inline double log_add(double a, double b) noexcept {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

/// Streaming log-sum-exp with a running max shift.
class LogSum {
 public:
  void add(double log_term) noexcept {
    if (log_term == kNegInf) return;
    if (log_term > max_) {
      sum_ = sum_ * std::exp(max_ - log_term) + 1.0;
      max_ = log_term;
    } else {
      sum_ += std::exp(log_term - max_);
    }
  }

  double value() const noexcept { return max_ == kNegInf ? kNegInf : max_ + std::log(sum_); }

 private:
  double max_ = kNegInf;
  double sum_ = 0.0;
};

inline double log_sum_exp(std::span<const double> terms) noexcept {
  if (terms.empty()) return kNegInf;
  const double hi = *std::max_element(terms.begin(), terms.end());
  if (hi == kNegInf) return kNegInf;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - hi);
  return hi + std::log(s);
}

}  // namespace mdm
