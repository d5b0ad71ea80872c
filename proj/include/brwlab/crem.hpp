#pragma once

// Continuous random energy model on the binary tree and the dyadic cascade.
//
// The CREM field has Cov(H(x), H(y)) = n A(C(x, y) / n). It is realized with
// independent edge Gaussians, the edge into generation k having variance
// n (A(k/n) - A((k-1)/n)); prefix sums of these reproduce n A(h/n).

#include <cstdint>
#include <vector>

#include "brwlab/log_weight.hpp"

namespace brwlab {

/// Nondecreasing A on [0, 1], A(0) = 0, A(1) = 1, linearly interpolated from
/// knots, plus the user-supplied right derivative A'(0).
class CremProfile {
 public:
  /// A(x) = x, A'(0) = 1.
  static CremProfile identity();
  static CremProfile piecewise(std::vector<double> knots_x, std::vector<double> knots_a,
                               double a_prime_0);

  double A(double x) const;
  double a_prime_0() const { return a_prime_0_; }
  bool is_identity() const { return identity_; }
  const std::vector<double>& knots_x() const { return x_; }
  const std::vector<double>& knots_a() const { return a_; }

  /// n (A(k/n) - A((k-1)/n)) for k = 1..n at index k; index 0 is 0. Exactly 1
  /// for the identity profile.
  std::vector<double> edge_variances(int n) const;

  /// sup A' <= A'(0) over the table segments (to 1e-12).
  bool satisfies_slope_bound() const;

 private:
  CremProfile() = default;
  std::vector<double> x_;
  std::vector<double> a_;
  double a_prime_0_ = 1.0;
  bool identity_ = false;
};

/// log Z_n = log sum_x e^{beta H(x)} - n ln 2 - beta^2 n / 2 on the binary tree
/// of depth n, leaf Gaussians keyed exactly as for the BRW with the same seed.
LogWeight crem_partition(int n, double beta, const CremProfile& profile, std::uint64_t seed);

/// sqrt(2 ln 2) / sqrt(A'(0)).
double crem_beta_c(const CremProfile& profile);

/// log E[Z_n^2] = log[(1/2) sum_{h<n} 2^-h e^{beta^2 n A(h/n)} + 2^-n e^{beta^2 n}].
double crem_second_moment(int n, double beta, const CremProfile& profile);

/// Random measure on [0, 1] with constant density on dyadic cells of level m.
struct DyadicMeasure {
  int depth = 0;
  /// Log mass of [i / 2^m, (i + 1) / 2^m).
  std::vector<LogWeight> masses;

  /// Log masses at a coarser level k <= depth, merged pairwise from the finest
  /// level so that each parent is exactly the combine of its two children.
  std::vector<LogWeight> level(int k) const;
  LogWeight total_mass() const;
};

inline constexpr int kCascadeMaxDepth = 24;

/// mu_m with masses 2^-m prod_{I ni x} e^{beta w_I - beta^2 / 2}; the weight of
/// the level-k cell is the Gaussian of the depth-k binary tree vertex with the
/// same address (left half = child 0). Throws "depth cap" for m > 24.
DyadicMeasure cascade_measure(int m, double beta, std::uint64_t seed);

}  // namespace brwlab
