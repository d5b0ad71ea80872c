#include "brwlab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "brwlab/log.hpp"
#include "brwlab/rng.hpp"

namespace brwlab {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string key(const std::string& name, int n, double beta) {
  return name + "_n=" + std::to_string(n) + "_beta=" + fmt(beta);
}

std::string key(const std::string& name, double beta) { return name + "_beta=" + fmt(beta); }

EnsembleSummary summarize_values(const std::vector<double>& xs, double ci_level) {
  return summarize(xs, ci_level);
}

/// e^a - e^b for a >= b in log form inputs, clamped at 0.
double linear_difference(double log_a, double log_b) {
  if (log_b == kNegInf) return std::exp(log_a);
  if (log_b >= log_a) return 0.0;
  return -std::expm1(log_b - log_a) * std::exp(log_a);
}

ScanResult start(const ExperimentConfig& cfg, std::string name) {
  ScanResult r;
  r.experiment = std::move(name);
  r.seed = cfg.seed;
  r.config_hash = cfg.config_hash;
  return r;
}

void require_exponent(double a, bool allow_one) {
  if (!(a > 0.0) || a > 1.0 || (!allow_one && a == 1.0))
    throw std::invalid_argument(allow_one ? "exponent a must lie in (0, 1]"
                                          : "exponent a must lie in (0, 1)");
}

double beta_c_of(const ExperimentConfig& cfg) {
  return critical_constants(cfg.offspring().mean()).beta_c;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (d < 2) throw std::invalid_argument("d must be at least 2");
  if (replicas < 1) throw std::invalid_argument("replicas must be at least 1");
  if (n_list.empty()) throw std::invalid_argument("n list is empty");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 0) throw std::invalid_argument("n must be nonnegative");
    if (i > 0 && n_list[i] <= n_list[i - 1])
      throw std::invalid_argument("n list must be strictly increasing");
  }
  if (beta_list.empty()) throw std::invalid_argument("beta list is empty");
  for (double b : beta_list)
    if (!(b >= 0.0) || !std::isfinite(b)) throw std::invalid_argument("beta must be >= 0");
  if (!(ci_level > 0.0 && ci_level < 1.0))
    throw std::invalid_argument("ci_level must lie in (0, 1)");
  if (!(growth_threshold > 1.0)) throw std::invalid_argument("growth threshold must exceed 1");
  if (n1 < 0) throw std::invalid_argument("n1 must be nonnegative");
  for (int n0 : n0_list)
    if (n0 < 0) throw std::invalid_argument("n0 must be nonnegative");
  barrier.validate();
  (void)offspring();
}

ScanRow ScanRow::from_summary(std::string statistic, int n, double beta,
                              const EnsembleSummary& s) {
  ScanRow r;
  r.statistic = std::move(statistic);
  r.n = n;
  r.beta = beta;
  r.mean = s.mean;
  r.std_error = s.stderr_mean();
  r.ci_lo = s.ci_lo();
  r.ci_hi = s.ci_hi();
  r.median = s.median();
  r.count = s.count;
  return r;
}

ScanRow ScanRow::exact(std::string statistic, int n, double beta, double value) {
  ScanRow r;
  r.statistic = std::move(statistic);
  r.n = n;
  r.beta = beta;
  r.mean = value;
  r.ci_lo = value;
  r.ci_hi = value;
  r.median = value;
  return r;
}

const ScanRow* ScanResult::find(const std::string& statistic, int n, double beta) const {
  for (const ScanRow& r : rows)
    if (r.statistic == statistic && r.n == n && r.beta == beta) return &r;
  return nullptr;
}

const ScanRow* ScanResult::find(const std::string& statistic, int n) const {
  for (const ScanRow& r : rows)
    if (r.statistic == statistic && r.n == n) return &r;
  return nullptr;
}

unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("BRWLAB_WORKERS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    warn("ignoring malformed BRWLAB_WORKERS");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::uint64_t count, unsigned workers,
                  const std::function<void(std::uint64_t)>& body) {
  workers = static_cast<unsigned>(std::min<std::uint64_t>(resolve_workers(workers), count));
  if (workers <= 1) {
    for (std::uint64_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      if (failed.load(std::memory_order_relaxed)) return;
      const std::uint64_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::uint64_t cell_seed(const ExperimentConfig& cfg, std::uint64_t r) {
  return replica_seed(cfg.seed, r);
}

std::vector<ReplicaOutcome> run_ensemble(const ExperimentConfig& cfg, int n, double beta,
                                         const PartitionOptions& options,
                                         std::uint64_t first_replica) {
  const OffspringLaw law = cfg.offspring();
  const VarianceProfile profile = VarianceProfile::make(cfg.profile, n);
  std::vector<ReplicaOutcome> out(cfg.replicas);
  parallel_for(cfg.replicas, cfg.workers, [&](std::uint64_t i) {
    const std::uint64_t r = first_replica + i;
    TreeStream t{law, n, cell_seed(cfg, r), cfg.survival};
    PartitionOptions o = options;
    o.replica = r;
    out[i] = partition_pair(t, beta, profile, o);
  });
  return out;
}

ScanResult universality_gap(const ExperimentConfig& cfg) {
  cfg.validate();
  const double bc = beta_c_of(cfg);
  if (!cfg.override_checks) {
    for (double b : cfg.beta_list)
      if (b >= bc) throw std::invalid_argument("beta must be below beta_c");
    if (cfg.profile.kind == ProfileKind::constant_one)
      throw std::invalid_argument("gap identically zero");
  }
  ScanResult res = start(cfg, "universality");
  PartitionOptions opts;
  opts.derivative = DerivativeMode::never;
  for (double beta : cfg.beta_list) {
    std::vector<EnsembleSummary> gaps;
    for (int n : cfg.n_list) {
      const auto outcomes = run_ensemble(cfg, n, beta, opts);
      std::vector<double> gap, w, wbar;
      for (const ReplicaOutcome& o : outcomes) {
        const double a = std::exp(o.log_W.value);
        const double b = std::exp(o.log_Wbar.value);
        gap.push_back(o.log_W == o.log_Wbar ? 0.0 : std::fabs(a - b));
        w.push_back(a);
        wbar.push_back(b);
      }
      gaps.push_back(summarize_values(gap, cfg.ci_level));
      res.rows.push_back(ScanRow::from_summary("gap", n, beta, gaps.back()));
      res.rows.push_back(ScanRow::from_summary("W", n, beta, summarize_values(w, cfg.ci_level)));
      res.rows.push_back(
          ScanRow::from_summary("Wbar", n, beta, summarize_values(wbar, cfg.ci_level)));
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < gaps.size(); ++i)
      decreasing = decreasing && gaps[i].mean < gaps[i - 1].mean;
    res.scalars[key("gap_decreasing", beta)] = decreasing ? 1.0 : 0.0;
    res.scalars[key("gap_ci_separated", beta)] =
        gaps.back().ci_hi() < gaps.front().ci_lo() ? 1.0 : 0.0;
  }
  return res;
}

bool l2_diverging(int d, double beta, const ProfileSpec& profile, const std::vector<int>& n_list,
                  double threshold) {
  if (n_list.size() < 2) throw std::invalid_argument("classification needs at least two n");
  const int n1 = n_list[n_list.size() - 2];
  const int n2 = n_list.back();
  const double e1 = exact_second_moment_dary(d, n1, beta, VarianceProfile::make(profile, n1));
  const double e2 = exact_second_moment_dary(d, n2, beta, VarianceProfile::make(profile, n2));
  return e2 - e1 > std::log(threshold);
}

double l2_transition(int d, const ProfileSpec& profile, const std::vector<int>& n_list,
                     double threshold, double lo, double hi, int iterations) {
  if (!(lo < hi)) throw std::invalid_argument("empty bracket");
  if (l2_diverging(d, lo, profile, n_list, threshold) ||
      !l2_diverging(d, hi, profile, n_list, threshold))
    throw std::invalid_argument("bracket does not straddle the transition");
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (l2_diverging(d, mid, profile, n_list, threshold))
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

ScanResult phase_scan_l2(const ExperimentConfig& cfg) {
  cfg.validate();
  if (!cfg.offspring().is_deterministic())
    throw std::invalid_argument("phase scan needs a deterministic d-ary tree");
  const int d = cfg.offspring().arity();
  ScanResult res = start(cfg, "phase-scan");
  PartitionOptions opts;
  opts.derivative = DerivativeMode::never;
  for (double beta : cfg.beta_list) {
    for (int n : cfg.n_list) {
      const double exact =
          exact_second_moment_dary(d, n, beta, VarianceProfile::make(cfg.profile, n));
      res.rows.push_back(ScanRow::exact("exact_second_moment", n, beta, std::exp(exact)));
      const auto outcomes = run_ensemble(cfg, n, beta, opts);
      std::vector<double> sq;
      for (const ReplicaOutcome& o : outcomes) sq.push_back(std::exp(2.0 * o.log_Wbar.value));
      res.rows.push_back(
          ScanRow::from_summary("mc_second_moment", n, beta, summarize_values(sq, cfg.ci_level)));
    }
    if (cfg.n_list.size() >= 2)
      res.scalars[key("diverging", beta)] =
          l2_diverging(d, beta, cfg.profile, cfg.n_list, cfg.growth_threshold) ? 1.0 : 0.0;
  }
  const CriticalConstants cc = critical_constants(static_cast<double>(d));
  res.scalars["beta_2"] = cc.beta_2;
  return res;
}

double fractional_rate(double a, double beta, double d) {
  const double b2 = beta * beta;
  return (1.0 - a) * std::log(d) - 0.5 * a * b2 + 0.5 * a * a * b2;
}

double optimal_fractional_exponent(double beta, double d) {
  if (!(beta > 0.0)) return 1.0;
  const double a = 0.5 + std::log(d) / (beta * beta);
  return std::clamp(a, 0.0, 1.0);
}

double decomposition_log_bound(double a, double beta, double d, const VarianceProfile& profile,
                               int n1) {
  if (n1 < 0 || n1 > profile.n()) throw std::invalid_argument("n1 out of range");
  require_exponent(a, false);
  if (a >= 0.5) throw std::invalid_argument("decomposition bound needs a < 1/2");
  const double b2 = beta * beta;
  const double m = static_cast<double>(n1);
  return 0.5 * (m * (1.0 - 2.0 * a) * std::log(d) - a * b2 * profile.prefix(n1) +
                2.0 * a * a * b2 * m);
}

ScanResult fractional_moment_scan(const ExperimentConfig& cfg) {
  cfg.validate();
  require_exponent(cfg.a, true);
  const double d = cfg.offspring().mean();
  ScanResult res = start(cfg, "fractional");
  PartitionOptions opts;
  opts.derivative = DerivativeMode::never;
  for (double beta : cfg.beta_list) {
    res.scalars[key("rate", beta)] = fractional_rate(cfg.a, beta, d);
    res.scalars[key("a_star", beta)] = optimal_fractional_exponent(beta, d);
    for (int n : cfg.n_list) {
      const auto outcomes = run_ensemble(cfg, n, beta, opts);
      std::vector<double> wa, wba;
      for (const ReplicaOutcome& o : outcomes) {
        wa.push_back(std::exp(cfg.a * o.log_W.value));
        wba.push_back(std::exp(cfg.a * o.log_Wbar.value));
      }
      res.rows.push_back(ScanRow::from_summary("W^a", n, beta, summarize_values(wa, cfg.ci_level)));
      res.rows.push_back(
          ScanRow::from_summary("Wbar^a", n, beta, summarize_values(wba, cfg.ci_level)));
      res.scalars[key("log_rate_bound", n, beta)] =
          static_cast<double>(n) * fractional_rate(cfg.a, beta, d);
      if (cfg.a < 0.5) {
        const int n1 = cfg.n1 > 0 ? std::min(cfg.n1, n) : n / 2;
        res.scalars[key("log_decomposition_bound", n, beta)] = decomposition_log_bound(
            cfg.a, beta, d, VarianceProfile::make(cfg.profile, n), n1);
      }
    }
  }
  return res;
}

KahaneResult kahane_check(const ExperimentConfig& cfg) {
  cfg.validate();
  require_exponent(cfg.a, true);
  if (cfg.profile.max_value() > 1.0) throw std::invalid_argument("kernel domination violated");
  KahaneResult out;
  out.scan = start(cfg, "kahane");
  PartitionOptions opts;
  opts.derivative = DerivativeMode::never;
  for (double beta : cfg.beta_list) {
    for (int n : cfg.n_list) {
      // W from replicas [0, R), Wbar from the independent replicas [R, 2R).
      const auto first = run_ensemble(cfg, n, beta, opts, 0);
      const auto second = run_ensemble(cfg, n, beta, opts, cfg.replicas);
      std::vector<double> wa, wba;
      for (const ReplicaOutcome& o : first) wa.push_back(std::exp(cfg.a * o.log_W.value));
      for (const ReplicaOutcome& o : second) wba.push_back(std::exp(cfg.a * o.log_Wbar.value));
      const EnsembleSummary sw = summarize_values(wa, cfg.ci_level);
      const EnsembleSummary sb = summarize_values(wba, cfg.ci_level);
      KahaneRecord rec;
      rec.n = n;
      rec.beta = beta;
      rec.a = cfg.a;
      rec.mean_W_a = sw.mean;
      rec.mean_Wbar_a = sb.mean;
      rec.difference = sb.mean - sw.mean;
      rec.std_error = std::hypot(sw.stderr_mean(), sb.stderr_mean());
      rec.pass = rec.difference >= -4.0 * rec.std_error;
      out.pass = out.pass && rec.pass;
      out.records.push_back(rec);
      out.scan.rows.push_back(ScanRow::from_summary("W^a", n, beta, sw));
      out.scan.rows.push_back(ScanRow::from_summary("Wbar^a", n, beta, sb));
      ScanRow diff = ScanRow::exact("difference", n, beta, rec.difference);
      diff.std_error = rec.std_error;
      const double z = normal_quantile(0.5 + 0.5 * cfg.ci_level);
      diff.ci_lo = rec.difference - z * rec.std_error;
      diff.ci_hi = rec.difference + z * rec.std_error;
      diff.count = cfg.replicas;
      out.scan.rows.push_back(diff);
      out.scan.scalars[key("pass", n, beta)] = rec.pass ? 1.0 : 0.0;
    }
  }
  out.scan.scalars["pass"] = out.pass ? 1.0 : 0.0;
  return out;
}

CriticalFitResult critical_decay_fit(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto& ns = cfg.n_list;
  if (ns.size() < 3 || ns.front() < 1 ||
      static_cast<double>(ns.back()) < 3.0 * static_cast<double>(ns.front()))
    throw std::invalid_argument("n list too short");
  const double beta = beta_c_of(cfg);
  CriticalFitResult out;
  out.scan = start(cfg, "critical-fit");
  PartitionOptions opts;
  opts.derivative = DerivativeMode::never;
  std::vector<std::pair<double, double>> points;
  std::vector<double> diagnostic;
  for (int n : ns) {
    const auto outcomes = run_ensemble(cfg, n, beta, opts);
    std::vector<double> w, scaled;
    const double root_n = std::sqrt(static_cast<double>(n));
    for (const ReplicaOutcome& o : outcomes) {
      w.push_back(std::exp(o.log_Wbar.value));
      scaled.push_back(root_n * w.back());
    }
    const EnsembleSummary sw = summarize_values(w, cfg.ci_level);
    const EnsembleSummary ss = summarize_values(scaled, cfg.ci_level);
    out.scan.rows.push_back(ScanRow::from_summary("Wbar", n, beta, sw));
    out.scan.rows.push_back(ScanRow::from_summary("sqrt_n_Wbar", n, beta, ss));
    points.emplace_back(static_cast<double>(n), sw.median());
    diagnostic.push_back(ss.median());
  }
  out.fit = fit_loglog(points);
  out.scan.scalars["slope"] = out.fit.slope;
  out.scan.scalars["intercept"] = out.fit.intercept;
  out.scan.scalars["stderr_slope"] = out.fit.stderr_slope;
  out.scan.scalars["r_squared"] = out.fit.r_squared;
  out.scan.scalars["beta_c"] = beta;
  const std::size_t k = std::min<std::size_t>(3, diagnostic.size());
  const auto tail_begin = diagnostic.end() - static_cast<std::ptrdiff_t>(k);
  const double hi = *std::max_element(tail_begin, diagnostic.end());
  const double lo = *std::min_element(tail_begin, diagnostic.end());
  out.scan.scalars["diagnostic_spread"] = hi / lo;
  return out;
}

ScanResult good_env_mass(const ExperimentConfig& cfg) {
  cfg.validate();
  const double alpha = cfg.barrier.alpha;
  const std::vector<int> n0s = cfg.n0_list.empty() ? std::vector<int>{cfg.barrier.n0} : cfg.n0_list;
  ScanResult res = start(cfg, "good-env");
  for (double beta : cfg.beta_list) {
    if (alpha <= beta || alpha >= 2.0 * beta)
      warn("alpha = " + fmt(alpha) + " lies outside (beta, 2 beta) for beta = " + fmt(beta));
    for (int n : cfg.n_list) {
      std::vector<EnsembleSummary> ks;
      for (int n0 : n0s) {
        PartitionOptions opts;
        opts.derivative = DerivativeMode::never;
        opts.barrier = BarrierSpec{alpha, n0};
        const auto outcomes = run_ensemble(cfg, n, beta, opts);
        std::vector<double> jw, k, jbw, kb;
        for (const ReplicaOutcome& o : outcomes) {
          jw.push_back(std::min(1.0, std::exp(o.log_J.value - o.log_W.value)));
          k.push_back(linear_difference(o.log_W.value, o.log_J.value));
          jbw.push_back(std::min(1.0, std::exp(o.log_Jbar.value - o.log_Wbar.value)));
          kb.push_back(linear_difference(o.log_Wbar.value, o.log_Jbar.value));
        }
        const std::string tag = "_n0=" + std::to_string(n0);
        ks.push_back(summarize_values(k, cfg.ci_level));
        res.rows.push_back(
            ScanRow::from_summary("J/W" + tag, n, beta, summarize_values(jw, cfg.ci_level)));
        res.rows.push_back(ScanRow::from_summary("K" + tag, n, beta, ks.back()));
        res.rows.push_back(ScanRow::from_summary("Jbar/Wbar" + tag, n, beta,
                                                 summarize_values(jbw, cfg.ci_level)));
        res.rows.push_back(
            ScanRow::from_summary("Kbar" + tag, n, beta, summarize_values(kb, cfg.ci_level)));
      }
      bool monotone = true;
      for (std::size_t i = 1; i < ks.size(); ++i) monotone = monotone && ks[i].mean <= ks[i - 1].mean;
      res.scalars[key("K_monotone", n, beta)] = monotone ? 1.0 : 0.0;
      res.scalars[key("K_separated", n, beta)] =
          ks.back().ci_hi() < ks.front().ci_lo() ? 1.0 : 0.0;
    }
  }
  return res;
}

ScanResult crem_scan(const ExperimentConfig& cfg) {
  cfg.validate();
  const CremProfile profile = cfg.crem ? *cfg.crem : CremProfile::identity();
  ScanResult res = start(cfg, "crem");
  res.scalars["crem_beta_c"] = crem_beta_c(profile);
  for (double beta : cfg.beta_list) {
    for (int n : cfg.n_list) {
      std::vector<double> z(cfg.replicas), z2(cfg.replicas);
      parallel_for(cfg.replicas, cfg.workers, [&](std::uint64_t r) {
        const double lz = crem_partition(n, beta, profile, cell_seed(cfg, r)).value;
        z[r] = std::exp(lz);
        z2[r] = std::exp(2.0 * lz);
      });
      res.rows.push_back(ScanRow::from_summary("Z", n, beta, summarize_values(z, cfg.ci_level)));
      res.rows.push_back(
          ScanRow::from_summary("mc_second_moment", n, beta, summarize_values(z2, cfg.ci_level)));
      res.rows.push_back(ScanRow::exact("exact_second_moment", n, beta,
                                        std::exp(crem_second_moment(n, beta, profile))));
    }
  }
  return res;
}

}  // namespace brwlab
