#pragma once

// Replica-ensemble experiments.
//
// Every experiment evaluates its cells one at a time; inside a cell the
// replicas run on a worker pool but each outcome is stored at its replica
// index and summarized in index order, so statistics do not depend on the
// number of workers.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "brwlab/brw.hpp"
#include "brwlab/crem.hpp"
#include "brwlab/fit.hpp"
#include "brwlab/stats.hpp"
#include "brwlab/tree.hpp"

namespace brwlab {

struct ExperimentConfig {
  // model
  int d = 2;
  /// Offspring law; empty means the deterministic d-ary tree.
  std::optional<OffspringLaw> law;
  SurvivalMode survival = SurvivalMode::conditioned;
  std::vector<int> n_list{8};
  std::vector<double> beta_list{0.5};
  ProfileSpec profile = ProfileSpec::constant();
  std::optional<CremProfile> crem;

  // ensemble
  std::uint64_t replicas = 1000;
  std::uint64_t seed = 1;
  /// 0: BRWLAB_WORKERS if set, else the hardware concurrency.
  unsigned workers = 0;

  // estimators
  double a = 0.5;
  BarrierSpec barrier{1.2, 2};
  std::vector<int> n0_list;
  /// Decomposition depth of the fractional bound; 0 means n / 2.
  int n1 = 0;
  double ci_level = 0.95;
  double growth_threshold = 1.05;
  /// Lifts the beta < beta_c and non-constant-profile checks.
  bool override_checks = false;

  /// Stamped into results; computed by the caller from the canonical config.
  std::uint64_t config_hash = 0;

  OffspringLaw offspring() const { return law ? *law : OffspringLaw::deterministic(d); }
  /// replicas >= 1, beta >= 0, n list strictly increasing and nonnegative,
  /// 0 < ci_level < 1. The exponent a is checked by the experiments using it.
  void validate() const;
};

struct ScanRow {
  std::string statistic;
  int n = 0;
  double beta = 0.0;
  double mean = 0.0;
  double std_error = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double median = 0.0;
  /// Replicas behind the row; 0 for exact (formula) rows.
  std::uint64_t count = 0;

  static ScanRow from_summary(std::string statistic, int n, double beta,
                              const EnsembleSummary& s);
  static ScanRow exact(std::string statistic, int n, double beta, double value);
};

struct ScanResult {
  std::string experiment;
  std::vector<ScanRow> rows;
  std::map<std::string, double> scalars;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;

  /// First row with this statistic at (n, beta); nullptr if absent.
  const ScanRow* find(const std::string& statistic, int n, double beta) const;
  const ScanRow* find(const std::string& statistic, int n) const;
};

/// Effective worker count for `requested` (0 = environment / hardware default).
unsigned resolve_workers(unsigned requested);

/// Runs body(r) for r = 0..count-1 on `workers` threads; rethrows the first exception.
void parallel_for(std::uint64_t count, unsigned workers,
                  const std::function<void(std::uint64_t)>& body);

/// Seed of replica `r` in a cell.
std::uint64_t cell_seed(const ExperimentConfig& cfg, std::uint64_t r);

/// One partition_pair per replica of (n, beta), stored by replica index.
std::vector<ReplicaOutcome> run_ensemble(const ExperimentConfig& cfg, int n, double beta,
                                         const PartitionOptions& options = {},
                                         std::uint64_t first_replica = 0);

/// Mean |W_n - Wbar_n| per n with coupled fields. Requires beta < beta_c and a
/// non-constant profile unless override_checks; a constant profile fails with
/// "gap identically zero".
ScanResult universality_gap(const ExperimentConfig& cfg);

/// True when E[Wbar^2] grows by more than `threshold` between the last two n.
bool l2_diverging(int d, double beta, const ProfileSpec& profile, const std::vector<int>& n_list,
                  double threshold);

/// Midpoint of the bounded/diverging bracket after bisection on [lo, hi].
double l2_transition(int d, const ProfileSpec& profile, const std::vector<int>& n_list,
                     double threshold, double lo, double hi, int iterations = 60);

/// Exact and Monte Carlo E[Wbar^2] per (n, beta) plus a bounded/diverging label.
ScanResult phase_scan_l2(const ExperimentConfig& cfg);

/// (1 - a) ln d - a beta^2 / 2 + a^2 beta^2 / 2.
double fractional_rate(double a, double beta, double d);
/// 1/2 + ln d / beta^2 clipped to (0, 1).
double optimal_fractional_exponent(double beta, double d);
/// Log of the decomposition bound on E[Wbar^a] at depth n1 (valid for a < 1/2):
///   (1/2) [n1 (1 - 2a) ln d - a beta^2 S_{n1} + 2 a^2 beta^2 n1].
double decomposition_log_bound(double a, double beta, double d, const VarianceProfile& profile,
                               int n1);

/// E[W^a], E[Wbar^a] per (n, beta) and the analytic rates. Accepts a in (0, 1].
ScanResult fractional_moment_scan(const ExperimentConfig& cfg);

struct KahaneRecord {
  int n = 0;
  double beta = 0.0;
  double a = 0.0;
  double mean_W_a = 0.0;
  double mean_Wbar_a = 0.0;
  double difference = 0.0;  // mean_Wbar_a - mean_W_a
  double std_error = 0.0;
  bool pass = false;
};

struct KahaneResult {
  std::vector<KahaneRecord> records;
  ScanResult scan;
  bool pass = true;
};

/// E[Wbar^a] >= E[W^a] - 4 stderr with independent fields for W and Wbar.
/// Profiles exceeding 1 fail with "kernel domination violated".
KahaneResult kahane_check(const ExperimentConfig& cfg);

struct CriticalFitResult {
  FitResult fit;
  ScanResult scan;
};

/// log median Wbar_n against log n at beta = beta_c(d). The n list needs at
/// least 3 points with n_max / n_min >= 3.
CriticalFitResult critical_decay_fit(const ExperimentConfig& cfg);

/// J/W, K = W - J and their profile counterparts per (n, beta, n0).
ScanResult good_env_mass(const ExperimentConfig& cfg);

/// Z_n of the CREM per (n, beta) with its exact second moment.
ScanResult crem_scan(const ExperimentConfig& cfg);

}  // namespace brwlab
