#pragma once

// Partition functions of Gaussian branching random walks.
//
//   W_n    = d^-n  sum_{|x|=n} exp(beta H_n(x)    - beta^2 n   / 2),  H_n    = sum_i w(x_i)
//   Wbar_n = d^-n  sum_{|x|=n} exp(beta Hbar_n(x) - beta^2 S_n / 2),  Hbar_n = sum_i sqrt(f(i/n)) w(x_i)
//
// with S_h = sum_{i<=h} f(i/n). Both are evaluated in one pass over the SAME
// per-vertex Gaussians w, so W - Wbar is a coupled difference. Two leaves with
// overlap h have Cov(H(x), H(y)) = h.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "brwlab/log_weight.hpp"
#include "brwlab/stats.hpp"
#include "brwlab/tree.hpp"

namespace brwlab {

enum class ProfileKind { constant_one, linear_decreasing, piecewise_table, custom_grid };

/// A variance profile before it is evaluated on the grid of a particular n.
struct ProfileSpec {
  ProfileKind kind = ProfileKind::constant_one;
  /// piecewise_table: knots t_0 = 0 < ... < t_k = 1, linearly interpolated.
  /// Values must lie in [0, 1] once evaluated by VarianceProfile::make.
  std::vector<double> knots_t;
  std::vector<double> knots_f;
  /// custom_grid: f(1/n), ..., f(n/n) for one fixed n.
  std::vector<double> grid;

  static ProfileSpec constant() { return {}; }
  static ProfileSpec linear() { return {ProfileKind::linear_decreasing, {}, {}, {}}; }
  static ProfileSpec table(std::vector<double> t, std::vector<double> f);
  static ProfileSpec custom(std::vector<double> values);

  std::string name() const;
  /// Largest value the spec can take (1 for the built-in kinds).
  double max_value() const;
};

/// f evaluated on the exact grid i/n of one depth n, with prefix sums.
class VarianceProfile {
 public:
  static VarianceProfile make(const ProfileSpec& spec, int n);
  static VarianceProfile constant_one(int n) { return make(ProfileSpec::constant(), n); }
  static VarianceProfile linear_decreasing(int n) { return make(ProfileSpec::linear(), n); }

  int n() const { return n_; }
  ProfileKind kind() const { return kind_; }
  /// f(i/n), i = 1..n.
  double f(int i) const { return values_[static_cast<std::size_t>(i)]; }
  /// S_h, h = 0..n.
  double prefix(int h) const { return prefix_[static_cast<std::size_t>(h)]; }
  /// sqrt(f(i/n)), index 0 unused.
  std::span<const double> scales() const { return scales_; }
  std::span<const double> prefix_sums() const { return prefix_; }

  bool is_constant_one() const;
  double max_value() const;

  /// f at the first grid point is within min(1, 1/sqrt(n)) of 1, the finite-n
  /// proxy for "continuous at 0 with f(0) = 1".
  bool continuous_at_zero() const;
  static double continuity_tolerance(int n);

 private:
  int n_ = 0;
  ProfileKind kind_ = ProfileKind::constant_one;
  std::vector<double> values_;  // index 0 unused
  std::vector<double> scales_;
  std::vector<double> prefix_;
};

/// Good-environment barrier: H_T < alpha T (resp. Hbar_T < alpha S_T) for every
/// T in {max(n0, 1), ..., n}.
struct BarrierSpec {
  double alpha = 1.0;
  int n0 = 0;

  void validate() const;
  /// First generation at which the barrier is checked.
  int first_checked() const { return n0 < 1 ? 1 : n0; }
};

struct CriticalConstants {
  double beta_c = 0.0;  // sqrt(2 ln d)
  double beta_2 = 0.0;  // sqrt(ln d)
  double d = 0.0;
};

CriticalConstants critical_constants(double d);

struct ReplicaOutcome {
  int n = 0;
  double beta = 0.0;
  LogWeight log_W;
  LogWeight log_Wbar;
  LogWeight log_J;
  LogWeight log_Jbar;
  /// Derivative martingale at beta_c; only meaningful when has_derivative.
  double D_n = 0.0;
  bool has_derivative = false;
  std::uint64_t leaf_count = 0;
  std::uint64_t seed = 0;
  std::uint64_t replica = 0;
};

enum class DerivativeMode { automatic, always, never };

struct PartitionOptions {
  std::optional<BarrierSpec> barrier;
  /// automatic: computed when beta equals beta_c(d) to 1e-12.
  DerivativeMode derivative = DerivativeMode::automatic;
  /// true: sum (beta_c H - beta_c^2 n / 2) exp(beta_c H - beta_c^2 n);
  /// false: the same without the d^-n inside the exponential.
  bool normalized_derivative = true;
  std::uint64_t replica = 0;
  /// Use the scalar depth-first path even for deterministic trees.
  bool force_generic = false;
};

/// One streaming pass computing W, Wbar and, with a barrier, J and Jbar.
/// Throws std::invalid_argument when profile.n() != t.depth.
ReplicaOutcome partition_pair(const TreeStream& t, double beta, const VarianceProfile& profile,
                              const PartitionOptions& options = {});

/// log J and log Jbar only. Subtrees are abandoned once both barriers fail, so
/// this is cheaper than partition_pair for binding barriers.
std::pair<LogWeight, LogWeight> restricted_partition(const TreeStream& t, double beta,
                                                     const VarianceProfile& profile,
                                                     const BarrierSpec& barrier);

/// log E[Wbar_n^2] for the complete d-ary tree, exact:
///   ((d-1)/d) sum_{h<n} d^-h e^{beta^2 S_h} + d^-n e^{beta^2 S_n}.
double exact_second_moment_dary(int d, int n, double beta, const VarianceProfile& profile);

/// mu + V alpha: the mean of a Gaussian vector (mean mu, covariance V) after
/// tilting by exp(<alpha, X>). The covariance is unchanged. V must be symmetric
/// and positive semidefinite to 1e-10.
Eigen::VectorXd girsanov_shift(const Eigen::MatrixXd& cov, const Eigen::VectorXd& mu,
                               const Eigen::VectorXd& alpha);

struct TiltedPairEstimate {
  ProportionInterval probability;
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
  /// Hbar_h of the shared segment under the tilted law.
  EnsembleSummary shared_endpoint;
};

/// Probability, under the law tilted by exp(beta (Hbar(x) + Hbar(y))), that two
/// paths sharing their first h steps both stay below alpha S_T for every checked T.
/// Shared steps have drift 2 beta f(i/n), separate steps beta f(i/n); variances f(i/n).
TiltedPairEstimate tilted_pair_walk(int n, int h, double beta, const VarianceProfile& profile,
                                    const BarrierSpec& barrier, std::uint64_t replicas,
                                    std::uint64_t seed, double ci_level = 0.95);

/// Derivative martingale at beta_c(d), d the offspring mean.
double derivative_martingale(const TreeStream& t, bool normalized = true);

}  // namespace brwlab
