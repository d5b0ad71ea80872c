#pragma once

// Positive masses carried as natural logarithms. -inf encodes mass zero.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>

#include "brwlab/detail/exp_table.hpp"

namespace brwlab {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct LogWeight {
  double value = kNegInf;

  static constexpr LogWeight zero() { return {kNegInf}; }
  static constexpr LogWeight one() { return {0.0}; }

  bool is_zero() const { return value == kNegInf; }
  double linear() const { return std::exp(value); }

  friend bool operator==(LogWeight, LogWeight) = default;
};

/// log(e^a + e^b).
inline double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kNegInf) return a;
  return a + std::log1p(std::exp(b - a));
}

inline LogWeight combine(LogWeight a, LogWeight b) { return {log_add(a.value, b.value)}; }

/// Two-pass max-shifted log-sum-exp; empty input gives -inf.
double log_sum_exp(std::span<const double> values);
LogWeight log_sum_exp(std::span<const LogWeight> values);

/// Streaming log-sum-exp with a running maximum.
class LogSumAccumulator {
 public:
  void add(double x) {
    if (x == kNegInf) return;
    if (x <= max_) {
      sum_ += std::exp(x - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - x) + 1.0;
      max_ = x;
    }
  }

  /// Adds a block whose mass is exp(block_max) * block_sum.
  void add_scaled(double block_max, double block_sum) {
    if (block_max == kNegInf || block_sum == 0.0) return;
    if (block_max <= max_) {
      sum_ += block_sum * std::exp(block_max - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - block_max) + block_sum;
      max_ = block_max;
    }
  }

  void merge(const LogSumAccumulator& other) { add_scaled(other.max_, other.sum_); }

  double value() const { return sum_ > 0.0 ? max_ + std::log(sum_) : kNegInf; }
  double max() const { return max_; }
  double scaled_sum() const { return sum_; }

 private:
  double max_ = kNegInf;
  double sum_ = 0.0;
};

namespace detail {

/// exp(x) for x <= 0, written without branches or libm calls so that loops over
/// it vectorize. x = k ln2 / 64 + r with |r| <= ln2 / 128; 2^(k/64) comes from
/// a table, e^r from a degree-5 polynomial. Relative error below 1e-15 on
/// [-708, 0]; returns 0 below -708 (such terms sit under double resolution
/// relative to the running maximum).
inline double fast_exp_nonpositive(double x) {
  constexpr double kInvLn2N = 92.332482616893658071;      // 64 / ln 2
  constexpr double kLn2HiN = 0x1.62e42fefa0000p-7;         // ln 2 / 64, high part
  constexpr double kLn2LoN = 0x1.cf79abc9e3b3ap-46;        // ln 2 / 64, low part
  constexpr double kShift = 0x1.8p52;
  const double xc = std::max(x, -708.0);
  const double kd_shifted = xc * kInvLn2N + kShift;
  const std::uint64_t ki = std::bit_cast<std::uint64_t>(kd_shifted);
  const double kd = kd_shifted - kShift;
  const double r = (xc - kd * kLn2HiN) - kd * kLn2LoN;
  const std::uint64_t idx = ki & ((1u << kExpTableBits) - 1);
  const double scale = std::bit_cast<double>(kExpTable[idx] + (ki << (52 - kExpTableBits)));
  const double r2 = r * r;
  const double p = 1.0 + r + r2 * (0.5 + r * (1.0 / 6.0)) +
                   r2 * r2 * (1.0 / 24.0 + r * (1.0 / 120.0));
  const double keep = static_cast<double>(x >= -708.0);
  return scale * p * keep;
}

}  // namespace detail

}  // namespace brwlab
