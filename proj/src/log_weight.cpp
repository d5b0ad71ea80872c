#include "brwlab/log_weight.hpp"

#include <vector>

namespace brwlab {

double log_sum_exp(std::span<const double> values) {
  double m = kNegInf;
  for (double v : values) m = std::max(m, v);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

LogWeight log_sum_exp(std::span<const LogWeight> values) {
  double m = kNegInf;
  for (LogWeight v : values) m = std::max(m, v.value);
  if (m == kNegInf) return LogWeight::zero();
  double s = 0.0;
  for (LogWeight v : values) s += std::exp(v.value - m);
  return {m + std::log(s)};
}

}  // namespace brwlab
