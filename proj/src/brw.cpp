#include "brwlab/brw.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "brwlab/log.hpp"
#include "engine.hpp"

namespace brwlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool in_unit_interval(double v) { return v >= 0.0 && v <= 1.0; }

double interpolate(const std::vector<double>& t, const std::vector<double>& f, double x) {
  if (x <= t.front()) return f.front();
  if (x >= t.back()) return f.back();
  std::size_t k = 1;
  while (t[k] < x) ++k;
  const double w = (x - t[k - 1]) / (t[k] - t[k - 1]);
  return f[k - 1] + w * (f[k] - f[k - 1]);
}

void warn_large_beta(double beta, int n) {
  if (std::fabs(beta) * std::sqrt(static_cast<double>(n)) > 600.0) {
    std::ostringstream os;
    os << "beta*sqrt(n) = " << std::fabs(beta) * std::sqrt(static_cast<double>(n))
       << " exceeds 600; linear-space values will overflow";
    warn(os.str());
  }
}

struct Thresholds {
  bool active = false;
  std::vector<double> plain;
  std::vector<double> scaled;
};

Thresholds make_thresholds(const std::optional<BarrierSpec>& barrier,
                           const VarianceProfile& profile) {
  Thresholds th;
  if (!barrier) return th;
  barrier->validate();
  const int n = profile.n();
  const int first = barrier->first_checked();
  if (first > n) return th;
  th.active = true;
  th.plain.assign(static_cast<std::size_t>(n) + 1, kInf);
  th.scaled.assign(static_cast<std::size_t>(n) + 1, kInf);
  for (int T = first; T <= n; ++T) {
    th.plain[static_cast<std::size_t>(T)] = barrier->alpha * static_cast<double>(T);
    th.scaled[static_cast<std::size_t>(T)] = barrier->alpha * profile.prefix(T);
  }
  return th;
}

detail::EngineResult run_engine(const TreeStream& t, std::uint64_t resample,
                                const detail::EngineInput& in, bool force_generic) {
  if (t.law.is_deterministic() && !force_generic)
    return detail::run_dary(t.law.arity(), t.depth, t.seed, in);
  return detail::run_general(t.law, t.depth, t.seed, resample, in);
}

void check_profile(const TreeStream& t, const VarianceProfile& profile) {
  if (t.depth < 0) throw std::invalid_argument("negative depth");
  if (profile.n() != t.depth) throw std::invalid_argument("profile length mismatch");
}

}  // namespace

double detail::second_moment_series(int d, std::span<const double> cumulative, double beta) {
  if (beta == 0.0) return 0.0;
  const int n = static_cast<int>(cumulative.size()) - 1;
  const double log_d = std::log(static_cast<double>(d));
  const double log_frac = std::log(static_cast<double>(d - 1) / static_cast<double>(d));
  const double b2 = beta * beta;
  std::vector<double> terms;
  terms.reserve(cumulative.size());
  for (int h = 0; h < n; ++h)
    terms.push_back(log_frac - static_cast<double>(h) * log_d +
                    b2 * cumulative[static_cast<std::size_t>(h)]);
  terms.push_back(-static_cast<double>(n) * log_d + b2 * cumulative[static_cast<std::size_t>(n)]);
  return log_sum_exp(terms);
}

ProfileSpec ProfileSpec::table(std::vector<double> t, std::vector<double> f) {
  if (t.size() != f.size() || t.size() < 2)
    throw std::invalid_argument("profile table needs matching knots (at least 2)");
  if (t.front() != 0.0 || t.back() != 1.0)
    throw std::invalid_argument("profile table knots must span [0, 1]");
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1])) throw std::invalid_argument("profile table knots must increase");
  for (double v : f)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("profile values must be finite and nonnegative");
  return {ProfileKind::piecewise_table, std::move(t), std::move(f), {}};
}

ProfileSpec ProfileSpec::custom(std::vector<double> values) {
  for (double v : values)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("profile values must be finite and nonnegative");
  return {ProfileKind::custom_grid, {}, {}, std::move(values)};
}

std::string ProfileSpec::name() const {
  switch (kind) {
    case ProfileKind::constant_one: return "constant";
    case ProfileKind::linear_decreasing: return "linear";
    case ProfileKind::piecewise_table: return "table";
    case ProfileKind::custom_grid: return "custom";
  }
  return "unknown";
}

double ProfileSpec::max_value() const {
  const std::vector<double>& v = kind == ProfileKind::piecewise_table ? knots_f : grid;
  if (kind == ProfileKind::constant_one || kind == ProfileKind::linear_decreasing) return 1.0;
  return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

VarianceProfile VarianceProfile::make(const ProfileSpec& spec, int n) {
  if (n < 0) throw std::invalid_argument("negative depth");
  VarianceProfile p;
  p.n_ = n;
  p.kind_ = spec.kind;
  const auto size = static_cast<std::size_t>(n) + 1;
  p.values_.assign(size, 0.0);
  if (spec.kind == ProfileKind::custom_grid && spec.grid.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("profile length mismatch");
  for (int i = 1; i <= n; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(n);
    double v = 1.0;
    switch (spec.kind) {
      case ProfileKind::constant_one: v = 1.0; break;
      case ProfileKind::linear_decreasing: v = 1.0 - x; break;
      case ProfileKind::piecewise_table: v = interpolate(spec.knots_t, spec.knots_f, x); break;
      case ProfileKind::custom_grid: v = spec.grid[static_cast<std::size_t>(i - 1)]; break;
    }
    if (!in_unit_interval(v)) throw std::invalid_argument("profile values must lie in [0, 1]");
    p.values_[static_cast<std::size_t>(i)] = v;
  }
  p.scales_.assign(size, 0.0);
  p.prefix_.assign(size, 0.0);
  for (std::size_t i = 1; i < size; ++i) {
    p.scales_[i] = std::sqrt(p.values_[i]);
    p.prefix_[i] = p.prefix_[i - 1] + p.values_[i];
  }
  return p;
}

bool VarianceProfile::is_constant_one() const {
  for (int i = 1; i <= n_; ++i)
    if (f(i) != 1.0) return false;
  return true;
}

double VarianceProfile::max_value() const {
  double m = 0.0;
  for (int i = 1; i <= n_; ++i) m = std::max(m, f(i));
  return m;
}

bool VarianceProfile::continuous_at_zero() const {
  if (n_ == 0) return true;
  return f(1) >= 1.0 - continuity_tolerance(n_);
}

double VarianceProfile::continuity_tolerance(int n) {
  if (n <= 1) return 1.0;
  return std::min(1.0, 1.0 / std::sqrt(static_cast<double>(n)));
}

void BarrierSpec::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("barrier alpha must be positive");
  if (n0 < 0) throw std::invalid_argument("barrier n0 must be nonnegative");
}

CriticalConstants critical_constants(double d) {
  if (!(d > 1.0)) throw std::invalid_argument("subcritical mean");
  const double l = std::log(d);
  return {std::sqrt(2.0 * l), std::sqrt(l), d};
}

ReplicaOutcome partition_pair(const TreeStream& t, double beta, const VarianceProfile& profile,
                              const PartitionOptions& options) {
  check_profile(t, profile);
  warn_large_beta(beta, t.depth);
  const int n = t.depth;
  const double d = t.law.mean();
  const double log_d = std::log(d);
  const std::uint64_t resample = resolve_shape(t);

  bool derivative = options.derivative == DerivativeMode::always;
  if (options.derivative == DerivativeMode::automatic)
    derivative = std::fabs(beta - std::sqrt(2.0 * log_d)) < 1e-12;

  const Thresholds th = make_thresholds(options.barrier, profile);
  detail::EngineInput in;
  in.beta = beta;
  in.scale = profile.scales();
  in.barrier = th.active;
  in.threshold_plain = th.plain;
  in.threshold_scaled = th.scaled;
  in.derivative = derivative;
  const detail::EngineResult r = run_engine(t, resample, in, options.force_generic);

  ReplicaOutcome out;
  out.n = n;
  out.beta = beta;
  out.leaf_count = r.leaves;
  out.seed = t.seed;
  out.replica = options.replica;
  if (beta == 0.0) {
    const double v = t.law.is_deterministic()
                         ? 0.0
                         : std::log(static_cast<double>(r.leaves)) - static_cast<double>(n) * log_d;
    out.log_W = {v};
    out.log_Wbar = {v};
  } else {
    out.log_W = {detail::finalize_log(r.plain.log_sum(), beta, static_cast<double>(n), n, log_d)};
    out.log_Wbar = {detail::finalize_log(r.scaled.log_sum(), beta, profile.prefix(n), n, log_d)};
  }
  if (th.active) {
    out.log_J = {detail::finalize_log(r.plain_restricted.log_sum(), beta, static_cast<double>(n),
                                      n, log_d)};
    out.log_Jbar = {detail::finalize_log(r.scaled_restricted.log_sum(), beta, profile.prefix(n),
                                         n, log_d)};
    if (beta == 0.0 && r.plain_restricted.s == static_cast<double>(r.leaves))
      out.log_J = out.log_W;
    if (beta == 0.0 && r.scaled_restricted.s == static_cast<double>(r.leaves))
      out.log_Jbar = out.log_Wbar;
    // Separate reductions can leave J a rounding step above W.
    out.log_J.value = std::min(out.log_J.value, out.log_W.value);
    out.log_Jbar.value = std::min(out.log_Jbar.value, out.log_Wbar.value);
  } else {
    out.log_J = out.log_W;
    out.log_Jbar = out.log_Wbar;
  }
  if (derivative) {
    out.has_derivative = true;
    if (r.plain.s > 0.0) {
      const double c = 0.5 * beta * beta * static_cast<double>(n);
      double lead = r.plain.max - c;
      if (options.normalized_derivative) lead -= static_cast<double>(n) * log_d;
      out.D_n = std::exp(lead) * (r.plain.t - c * r.plain.s);
    }
  }
  return out;
}

std::pair<LogWeight, LogWeight> restricted_partition(const TreeStream& t, double beta,
                                                     const VarianceProfile& profile,
                                                     const BarrierSpec& barrier) {
  check_profile(t, profile);
  const Thresholds th = make_thresholds(barrier, profile);
  if (!th.active) {
    PartitionOptions o;
    o.derivative = DerivativeMode::never;
    const ReplicaOutcome r = partition_pair(t, beta, profile, o);
    return {r.log_J, r.log_Jbar};
  }
  warn_large_beta(beta, t.depth);
  const int n = t.depth;
  const double log_d = std::log(t.law.mean());
  detail::EngineInput in;
  in.beta = beta;
  in.scale = profile.scales();
  in.barrier = true;
  in.threshold_plain = th.plain;
  in.threshold_scaled = th.scaled;
  in.restricted_only = true;
  const detail::EngineResult r = run_engine(t, resolve_shape(t), in, false);
  return {LogWeight{detail::finalize_log(r.plain_restricted.log_sum(), beta,
                                         static_cast<double>(n), n, log_d)},
          LogWeight{detail::finalize_log(r.scaled_restricted.log_sum(), beta, profile.prefix(n), n,
                                         log_d)}};
}

double exact_second_moment_dary(int d, int n, double beta, const VarianceProfile& profile) {
  if (d < 2) throw std::invalid_argument("d must be at least 2");
  if (n < 0) throw std::invalid_argument("negative depth");
  if (profile.n() != n) throw std::invalid_argument("profile length mismatch");
  return detail::second_moment_series(d, profile.prefix_sums(), beta);
}

Eigen::VectorXd girsanov_shift(const Eigen::MatrixXd& cov, const Eigen::VectorXd& mu,
                               const Eigen::VectorXd& alpha) {
  const auto k = cov.rows();
  if (cov.cols() != k || mu.size() != k || alpha.size() != k)
    throw std::invalid_argument("dimension mismatch");
  if (!cov.allFinite()) throw std::invalid_argument("covariance not finite");
  const double scale = std::max(1.0, k > 0 ? cov.cwiseAbs().maxCoeff() : 0.0);
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("covariance not symmetric");
  if (k > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::invalid_argument("eigen decomposition failed");
    if (es.eigenvalues().minCoeff() < -1e-10 * scale)
      throw std::invalid_argument("covariance not positive semidefinite");
  }
  return mu + cov * alpha;
}

TiltedPairEstimate tilted_pair_walk(int n, int h, double beta, const VarianceProfile& profile,
                                    const BarrierSpec& barrier, std::uint64_t replicas,
                                    std::uint64_t seed, double ci_level) {
  if (n < 0) throw std::invalid_argument("negative depth");
  if (h < 0 || h > n) throw std::invalid_argument("overlap out of range");
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  if (profile.n() != n) throw std::invalid_argument("profile length mismatch");
  if (replicas == 0) throw std::invalid_argument("replicas must be positive");
  barrier.validate();

  TiltedPairEstimate est;
  est.trials = replicas;
  est.shared_endpoint.ci_level = ci_level;
  const int first = barrier.first_checked();
  const auto checked = [&](int T, double hb) {
    return T < first || hb < barrier.alpha * profile.prefix(T);
  };

  for (std::uint64_t r = 0; r < replicas; ++r) {
    const std::uint64_t s = replica_seed(seed, r);
    std::uint64_t kx = root_key(s);
    double hx = 0.0;
    bool ok = true;
    for (int i = 1; i <= h; ++i) {
      kx = child_key(kx, 0);
      const double z = vertex_gaussian(kx);
      hx += 2.0 * beta * profile.f(i) + profile.scales()[static_cast<std::size_t>(i)] * z;
      ok = ok && checked(i, hx);
    }
    est.shared_endpoint.add(hx);
    double hy = hx;
    std::uint64_t ky = kx;
    for (int i = h + 1; i <= n; ++i) {
      const double sc = profile.scales()[static_cast<std::size_t>(i)];
      kx = child_key(kx, 0);
      hx += beta * profile.f(i) + sc * vertex_gaussian(kx);
      ky = child_key(ky, i == h + 1 ? 1 : 0);
      hy += beta * profile.f(i) + sc * vertex_gaussian(ky);
      ok = ok && checked(i, hx) && checked(i, hy);
    }
    if (ok) ++est.successes;
  }
  est.probability = wilson_interval(est.successes, est.trials, ci_level);
  return est;
}

double derivative_martingale(const TreeStream& t, bool normalized) {
  const double beta_c = critical_constants(t.law.mean()).beta_c;
  PartitionOptions o;
  o.derivative = DerivativeMode::always;
  o.normalized_derivative = normalized;
  return partition_pair(t, beta_c, VarianceProfile::constant_one(t.depth), o).D_n;
}

}  // namespace brwlab
