#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace brwlab {

/// Standard normal CDF.
double normal_cdf(double x);

/// Inverse standard normal CDF (Wichura, AS 241), p in (0, 1).
double normal_quantile(double p);

/// Deterministic mergeable quantile sketch.
///
/// KLL-style compactor hierarchy: level h holds items of weight 2^h and has
/// capacity k. A full level is sorted and every other item is promoted, the
/// kept parity alternating per level. The worst-case rank error is bounded by
/// (levels / k) * count, i.e. under 1% for k = 1024 up to ~10^6 items; below
/// k items the sketch is exact.
class QuantileSketch {
 public:
  explicit QuantileSketch(std::size_t k = 1024) : k_(k) {}

  void add(double x);
  void merge(const QuantileSketch& other);

  /// Approximate q-quantile (q in [0, 1]); NaN when empty.
  double quantile(double q) const;
  /// Approximate fraction of items <= x.
  double rank(double x) const;

  std::uint64_t count() const { return count_; }
  std::size_t retained() const;

 private:
  void compact_from(std::size_t level);

  std::size_t k_;
  std::uint64_t count_ = 0;
  std::vector<std::vector<double>> levels_;
  std::vector<std::uint8_t> parity_;
};

/// Streaming moments and quantiles of one statistic over replicas.
struct EnsembleSummary {
  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;  // sum of squared deviations
  double min = 0.0;
  double max = 0.0;
  QuantileSketch sketch;
  double ci_level = 0.95;

  void add(double x);
  void merge(const EnsembleSummary& other);

  double variance() const { return count >= 2 ? m2 / static_cast<double>(count - 1) : 0.0; }
  double stderr_mean() const;
  double ci_half_width() const;
  double ci_lo() const { return mean - ci_half_width(); }
  double ci_hi() const { return mean + ci_half_width(); }
  double median() const { return sketch.quantile(0.5); }
};

EnsembleSummary summarize(std::span<const double> xs, double ci_level = 0.95);

/// Wilson score interval for a binomial proportion.
struct ProportionInterval {
  double estimate = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};
ProportionInterval wilson_interval(std::uint64_t successes, std::uint64_t trials,
                                   double ci_level = 0.95);

/// Sample Pearson correlation; 0 for degenerate input.
double correlation(std::span<const double> x, std::span<const double> y);

}  // namespace brwlab
