#pragma once

// Streaming evaluation of exp-weighted leaf sums over implicit trees.
//
// Two "lanes" share every per-vertex Gaussian w: the plain lane accumulates
// H += w, the scaled lane Hbar += scale[T] * w. Each lane optionally carries a
// barrier mask (H_T < threshold[T]) yielding the restricted sums. All sums are
// kept as (running max, scaled sum) pairs of beta * H over the leaves.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "brwlab/log_weight.hpp"
#include "brwlab/tree.hpp"

namespace brwlab::detail {

/// Running (max, sum e^{x - max}, sum x e^{x - max}) over values x.
struct MomentAccumulator {
  double max = kNegInf;
  double s = 0.0;
  double t = 0.0;

  void add(double x) {
    if (x == kNegInf) return;
    if (x <= max) {
      const double e = std::exp(x - max);
      s += e;
      t += x * e;
    } else {
      const double r = std::exp(max - x);
      s = s * r + 1.0;
      t = t * r + x;
      max = x;
    }
  }

  void add_scaled(double block_max, double block_s, double block_t) {
    if (block_max == kNegInf || block_s == 0.0) return;
    if (block_max <= max) {
      const double r = std::exp(block_max - max);
      s += block_s * r;
      t += block_t * r;
    } else {
      const double r = std::exp(max - block_max);
      s = s * r + block_s;
      t = t * r + block_t;
      max = block_max;
    }
  }

  /// log sum e^x.
  double log_sum() const { return s > 0.0 ? max + std::log(s) : kNegInf; }
};

struct EngineInput {
  double beta = 0.0;
  /// Per-generation multiplier of w in the scaled lane, index 1..n.
  std::span<const double> scale;
  bool barrier = false;
  /// Barrier thresholds, index 1..n; +inf where unchecked.
  std::span<const double> threshold_plain;
  std::span<const double> threshold_scaled;
  /// Also accumulate sum x e^x in the plain lane.
  bool derivative = false;
  /// Skip subtrees once both barrier masks are dead; plain/scaled totals are
  /// then incomplete and must not be used.
  bool restricted_only = false;
};

struct EngineResult {
  MomentAccumulator plain;
  MomentAccumulator scaled;
  MomentAccumulator plain_restricted;
  MomentAccumulator scaled_restricted;
  std::uint64_t leaves = 0;
};

/// lse - beta^2 variance / 2 - n log d: the normalization shared by every
/// partition function.
inline double finalize_log(double lse, double beta, double variance, int n, double log_d) {
  if (lse == kNegInf) return kNegInf;
  return lse - 0.5 * beta * beta * variance - static_cast<double>(n) * log_d;
}

/// log[((d-1)/d) sum_{h<n} d^-h e^{beta^2 v_h} + d^-n e^{beta^2 v_n}] for
/// cumulative variances v_0..v_n.
double second_moment_series(int d, std::span<const double> cumulative, double beta);

/// Complete d-ary tree of depth n: level-batched kernel.
EngineResult run_dary(int d, int n, std::uint64_t seed, const EngineInput& in);

/// Any offspring law: scalar depth-first traversal.
EngineResult run_general(const OffspringLaw& law, int n, std::uint64_t seed,
                         std::uint64_t resample, const EngineInput& in);

}  // namespace brwlab::detail
