// Acceptance run: one PASS/FAIL line per criterion on stdout, details and
// timings on stderr. Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "brwlab/brw.hpp"
#include "brwlab/config.hpp"
#include "brwlab/crem.hpp"
#include "brwlab/experiments.hpp"

using namespace brwlab;
using nlohmann::json;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

std::string num(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

ExperimentConfig config(const json& j) { return config_from_json(j); }

Verdict constants() {
  const CriticalConstants c = critical_constants(2.0);
  const bool ok = std::fabs(c.beta_c - 1.1774100226) < 1e-9 && std::fabs(c.beta_2 - 0.8325546112) < 1e-9;
  return {ok, "beta_c=" + num(c.beta_c, 12) + " beta_2=" + num(c.beta_2, 12)};
}

Verdict second_moment_oracle() {
  bool ok = true;
  double worst = 0;
  for (const char* profile : {"constant", "linear"}) {
    const ScanResult r = phase_scan_l2(config({{"d", 2},
                                              {"n_list", {1, 4, 8}},
                                              {"beta_list", {0.3, 0.7, 1.0}},
                                              {"profile", profile},
                                              {"replicas", 100000},
                                              {"seed", 2}}));
    for (int n : {1, 4, 8})
      for (double b : {0.3, 0.7, 1.0}) {
        const ScanRow* mc = r.find("mc_second_moment", n, b);
        const ScanRow* ex = r.find("exact_second_moment", n, b);
        const double dev = std::fabs(mc->mean - ex->mean);
        // A zero stderr (deterministic cell) demands exact agreement.
        if (mc->std_error > 0) worst = std::max(worst, dev / mc->std_error);
        if (!(dev <= 4.0 * mc->std_error)) {
          ok = false;
          std::cerr << "  c2 miss: " << profile << " n=" << n << " beta=" << b << " dev=" << dev << '\n';
        }
      }
  }
  return {ok, "18 cells, worst |MC - exact| = " + num(worst, 3) + " stderr"};
}

Verdict beta2_bracket() {
  std::vector<int> ns;
  for (int n = 1; n <= 24; ++n) ns.push_back(n);
  bool ok = true;
  std::string detail;
  for (int d : {2, 3}) {
    const double target = std::sqrt(std::log(static_cast<double>(d)));
    const double est = l2_transition(d, ProfileSpec::constant(), ns, 1.05, 0.1, 3.0);
    const double rel = std::fabs(est - target) / target;
    ok = ok && rel < 0.05;
    detail += "d=" + std::to_string(d) + ": " + num(est) + " vs " + num(target) + " (" +
              num(100 * rel, 3) + "%) ";
  }
  return {ok, detail};
}

Verdict universality() {
  const ScanResult r = universality_gap(config({{"d", 2},
                                                {"profile", "linear"},
                                                {"beta", 0.9},
                                                {"n_list", {8, 16, 24}},
                                                {"replicas", 10000},
                                                {"seed", 4}}));
  const ScanRow* g8 = r.find("gap", 8, 0.9);
  const ScanRow* g16 = r.find("gap", 16, 0.9);
  const ScanRow* g24 = r.find("gap", 24, 0.9);
  const bool ok = g8->mean > g16->mean && g16->mean > g24->mean && g24->ci_hi < g8->ci_lo;
  return {ok, "mean gap " + num(g8->mean) + " > " + num(g16->mean) + " > " + num(g24->mean) +
                  "; CI(24) hi " + num(g24->ci_hi) + " < CI(8) lo " + num(g8->ci_lo)};
}

Verdict strong_disorder() {
  const ScanResult r = fractional_moment_scan(config({{"d", 2},
                                                      {"profile", "constant"},
                                                      {"beta", 2.0},
                                                      {"a", 0.673},
                                                      {"n", 24},
                                                      {"replicas", 1000},
                                                      {"seed", 5}}));
  const ScanRow* w = r.find("Wbar^a", 24, 2.0);
  const double rate = r.scalars.at("rate_beta=2");
  return {w->mean < 0.05, "E[Wbar^a] = " + num(w->mean) + " +- " + num(w->std_error) +
                              "; rate " + num(rate, 4) + ", bound e^{24 rate} = " + num(std::exp(24 * rate))};
}

Verdict critical_decay() {
  bool ok = true;
  std::string detail;
  for (const char* profile : {"constant", "linear"}) {
    const CriticalFitResult f = critical_decay_fit(config({{"d", 2},
                                                           {"profile", profile},
                                                           {"n_list", {8, 12, 16, 20, 24}},
                                                           {"replicas", 200},
                                                           {"seed", 6}}));
    double hi = 0, lo = INFINITY;
    for (int n : {16, 20, 24}) {
      const double m = f.scan.find("sqrt_n_Wbar", n)->median;
      hi = std::max(hi, m);
      lo = std::min(lo, m);
    }
    const bool slope_ok = f.fit.slope >= -0.80 && f.fit.slope <= -0.25;
    const bool spread_ok = hi / lo < 2.0;
    ok = ok && slope_ok && spread_ok;
    detail += std::string(profile) + ": slope " + num(f.fit.slope, 4) + ", sqrt(n) median spread " +
              num(hi / lo, 4) + "; ";
  }
  return {ok, detail};
}

Verdict kahane() {
  const KahaneResult k = kahane_check(config({{"d", 2},
                                              {"profile", "linear"},
                                              {"beta", 1.0},
                                              {"a", 0.5},
                                              {"n", 16},
                                              {"replicas", 100000},
                                              {"seed", 7}}));
  const KahaneRecord& r = k.records.front();
  return {k.pass, "E[Wbar^a] " + num(r.mean_Wbar_a) + ", E[W^a] " + num(r.mean_W_a) + ", diff " +
                      num(r.difference) + " (" + num(r.difference / r.std_error, 3) + " stderr)"};
}

Verdict girsanov() {
  const int n = 16;
  const double beta = 0.9;
  const VarianceProfile prof = VarianceProfile::linear_decreasing(n);
  bool ok = true;
  std::string detail;
  for (int h : {0, 4, 8}) {
    const TiltedPairEstimate e = tilted_pair_walk(n, h, beta, prof, BarrierSpec{1.2, 2}, 100000, 8);
    const double target = 2 * beta * prof.prefix(h);
    const double dev = std::fabs(e.shared_endpoint.mean - target);
    ok = ok && dev <= 4 * e.shared_endpoint.stderr_mean();
    detail += "h=" + std::to_string(h) + ": " + num(e.shared_endpoint.mean) + " vs " + num(target) + "; ";
  }
  return {ok, detail};
}

Verdict good_env() {
  const ScanResult r = good_env_mass(config({{"d", 2},
                                             {"profile", "linear"},
                                             {"beta", 0.9},
                                             {"alpha", 1.2},
                                             {"n", 16},
                                             {"n0_list", {2, 6, 12}},
                                             {"replicas", 10000},
                                             {"seed", 9}}));
  const ScanRow* k2 = r.find("K_n0=2", 16, 0.9);
  const ScanRow* k6 = r.find("K_n0=6", 16, 0.9);
  const ScanRow* k12 = r.find("K_n0=12", 16, 0.9);
  const bool ok = k2->mean > k6->mean && k6->mean > k12->mean && k12->ci_hi < k2->ci_lo;
  return {ok, "E[K] n0=2: " + num(k2->mean) + ", n0=6: " + num(k6->mean) + ", n0=12: " + num(k12->mean)};
}

Verdict crem() {
  bool bitwise = true;
  for (int n : {4, 8, 12})
    for (double beta : {0.5, 1.0, 1.5})
      for (std::uint64_t r = 0; r < 20; ++r) {
        const std::uint64_t seed = replica_seed(10, r);
        TreeStream t{OffspringLaw::deterministic(2), n, seed, SurvivalMode::raw};
        PartitionOptions o;
        o.derivative = DerivativeMode::never;
        bitwise = bitwise && crem_partition(n, beta, CremProfile::identity(), seed) ==
                                 partition_pair(t, beta, VarianceProfile::constant_one(n), o).log_W;
      }
  const ScanResult r = crem_scan(config({{"crem", {{"x", {0.0, 0.5, 1.0}}, {"A", {0.0, 0.7, 1.0}}, {"a_prime_0", 1.4}}},
                                         {"n", 12},
                                         {"beta", 0.8},
                                         {"replicas", 10000},
                                         {"seed", 10}}));
  const ScanRow* z = r.find("Z", 12, 0.8);
  const bool mean_ok = std::fabs(z->mean - 1.0) <= 4 * z->std_error;
  const bool bc_ok = crem_beta_c(CremProfile::identity()) == critical_constants(2.0).beta_c;
  return {bitwise && mean_ok && bc_ok, std::string("bitwise ") + (bitwise ? "yes" : "no") + ", E[Z_12] = " +
                                           num(z->mean) + " +- " + num(z->std_error) + ", beta_c " +
                                           (bc_ok ? "equal" : "differs")};
}

Verdict cascade() {
  const std::uint64_t R = 10000;
  std::vector<double> mass(R);
  parallel_for(R, 0, [&](std::uint64_t r) { mass[r] = cascade_measure(12, 0.8, replica_seed(11, r)).total_mass().linear(); });
  const EnsembleSummary s = summarize(mass);
  const DyadicMeasure mu = cascade_measure(12, 0.8, 11);
  bool refine = true;
  for (int k = 0; k < 12; ++k) {
    const auto coarse = mu.level(k);
    const auto fine = mu.level(k + 1);
    for (std::size_t i = 0; i < coarse.size(); ++i)
      refine = refine && coarse[i] == combine(fine[2 * i], fine[2 * i + 1]);
  }
  const bool ok = std::fabs(s.mean - 1.0) <= 4 * s.stderr_mean() && refine;
  return {ok, "mean mass " + num(s.mean) + " +- " + num(s.stderr_mean()) + ", refinement " +
                  (refine ? "exact" : "broken")};
}

Verdict reproducibility() {
  json j = {{"d", 2}, {"profile", "linear"}, {"n_list", {8, 12, 16, 20, 24}}, {"replicas", 200}, {"seed", 6}};
  auto csv = [](const ScanResult& r) {
    std::ostringstream os;
    write_scan_csv(os, r);
    return os.str();
  };
  j["workers"] = 1;
  const ExperimentConfig a = config(j);
  const std::string first = csv(critical_decay_fit(a).scan);
  j["workers"] = 3;
  const ExperimentConfig b = config(j);
  const std::string second = csv(critical_decay_fit(b).scan);
  const bool ok = a.config_hash == b.config_hash && first == second;
  return {ok, "config " + hex64(a.config_hash) + ", " + std::to_string(std::count(first.begin(), first.end(), '\n')) +
                  " CSV lines " + (first == second ? "identical" : "differ")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"critical constants", constants},
      {"second-moment oracle", second_moment_oracle},
      {"beta_2 bracket", beta2_bracket},
      {"universality gap", universality},
      {"strong disorder above beta_c", strong_disorder},
      {"critical decay", critical_decay},
      {"Kahane direction", kahane},
      {"Girsanov contract", girsanov},
      {"good-environment mass", good_env},
      {"CREM reductions", crem},
      {"cascade normalization", cascade},
      {"reproducibility", reproducibility},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!v.pass) ++failed;
    std::cout << "criterion " << i + 1 << " (" << criteria[i].first << "): " << (v.pass ? "PASS" : "FAIL")
              << " - " << v.detail << " [" << num(secs, 4) << " s]" << std::endl;
  }
  return failed;
}
