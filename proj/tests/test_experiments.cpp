#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>

#include "brwlab/experiments.hpp"
#include "brwlab/log.hpp"

using namespace brwlab;

namespace {

ExperimentConfig base(std::vector<int> ns, std::vector<double> betas, std::uint64_t replicas) {
  ExperimentConfig c;
  c.n_list = std::move(ns);
  c.beta_list = std::move(betas);
  c.replicas = replicas;
  c.seed = 3;
  c.workers = 1;
  return c;
}

void same_rows(const ScanResult& a, const ScanResult& b) {
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].statistic == b.rows[i].statistic);
    CHECK(a.rows[i].mean == b.rows[i].mean);
    CHECK(a.rows[i].std_error == b.rows[i].std_error);
    CHECK(a.rows[i].count == b.rows[i].count);
  }
  CHECK(a.scalars == b.scalars);
}

}  // namespace

TEST_CASE("config validation") {
  ExperimentConfig c = base({4, 8}, {0.5}, 10);
  CHECK_NOTHROW(c.validate());
  c.n_list = {8, 4};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = base({4}, {-0.1}, 10);
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = base({4}, {0.5}, 0);
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("results do not depend on the worker count") {
  ExperimentConfig c = base({4, 6}, {0.6, 1.0}, 300);
  c.profile = ProfileSpec::linear();
  c.workers = 1;
  const ScanResult one = universality_gap(c);
  c.workers = 4;
  same_rows(one, universality_gap(c));
  CHECK(resolve_workers(3) == 3);
  CHECK(resolve_workers(0) >= 1);
}

TEST_CASE("universality gap identities and ordering") {
  ExperimentConfig c = base({4, 6}, {0.9}, 200);
  CHECK_THROWS_WITH_AS(universality_gap(c), "gap identically zero", std::invalid_argument);
  c.override_checks = true;
  const ScanResult flat = universality_gap(c);
  CHECK(flat.find("gap", 4, 0.9)->mean == 0.0);
  CHECK(flat.find("gap", 6, 0.9)->mean == 0.0);

  c = base({4, 6}, {0.0}, 50);
  c.profile = ProfileSpec::linear();
  CHECK(universality_gap(c).find("gap", 6, 0.0)->mean == 0.0);

  c = base({4}, {1.3}, 10);
  c.profile = ProfileSpec::linear();
  CHECK_THROWS_AS(universality_gap(c), std::invalid_argument);

  c = base({4, 8}, {0.9}, 400);
  c.profile = ProfileSpec::linear();
  const ScanResult r = universality_gap(c);
  for (const ScanRow& row : r.rows) {
    CHECK(row.count == 400);
    if (row.statistic == "gap") CHECK(row.mean >= 0.0);
  }
}

TEST_CASE("phase scan: MC agrees with the exact moment and classification") {
  ExperimentConfig c = base({1, 4, 8}, {0.3, 0.7, 1.0}, 20000);
  c.profile = ProfileSpec::linear();
  const ScanResult r = phase_scan_l2(c);
  for (int n : c.n_list)
    for (double b : c.beta_list) {
      const ScanRow* mc = r.find("mc_second_moment", n, b);
      const ScanRow* ex = r.find("exact_second_moment", n, b);
      REQUIRE(mc);
      REQUIRE(ex);
      CHECK(ex->count == 0);
      CHECK(std::fabs(mc->mean - ex->mean) <= 4 * mc->std_error);
    }
  const double b2 = critical_constants(2).beta_2;
  std::vector<int> ns;
  for (int n = 1; n <= 24; ++n) ns.push_back(n);
  CHECK_FALSE(l2_diverging(2, 0.9 * b2, ProfileSpec::constant(), ns, 1.05));
  CHECK(l2_diverging(2, 1.1 * b2, ProfileSpec::constant(), ns, 1.05));
  CHECK_THROWS_AS(l2_transition(2, ProfileSpec::constant(), ns, 1.05, 0.1, 0.2), std::invalid_argument);

  ExperimentConfig gw = base({2}, {0.5}, 2);
  gw.law = OffspringLaw::poisson(2.0);
  CHECK_THROWS_AS(phase_scan_l2(gw), std::invalid_argument);
}

TEST_CASE("doubling replicas narrows intervals by sqrt 2") {
  ExperimentConfig c = base({6}, {0.5}, 4000);
  c.profile = ProfileSpec::linear();
  const ScanResult small = universality_gap(c);
  c.replicas = 8000;
  const ScanResult big = universality_gap(c);
  for (const char* stat : {"gap", "W", "Wbar"}) {
    const ScanRow* a = small.find(stat, 6, 0.5);
    const ScanRow* b = big.find(stat, 6, 0.5);
    const double ratio = (a->ci_hi - a->ci_lo) / (b->ci_hi - b->ci_lo);
    CHECK(ratio == doctest::Approx(std::sqrt(2.0)).epsilon(0.15));
  }
}

TEST_CASE("fractional moments and analytic rates") {
  ExperimentConfig c = base({6}, {0.8}, 20000);
  c.a = 1.0;
  const ScanResult r = fractional_moment_scan(c);
  const ScanRow* w = r.find("W^a", 6, 0.8);
  CHECK(std::fabs(w->mean - 1.0) < 4 * w->std_error);

  CHECK(fractional_rate(0.673, 2.0, 2.0) == doctest::Approx(-0.2135).epsilon(1e-3));
  const double bc = critical_constants(2).beta_c;
  CHECK(std::fabs(fractional_rate(1.0, bc, 2.0)) < 1e-15);
  CHECK(std::fabs(fractional_rate(1.0 - 1e-9, bc, 2.0)) < 1e-8);
  CHECK(optimal_fractional_exponent(2.0, 2.0) == doctest::Approx(0.5 + std::log(2.0) / 4));
  CHECK(optimal_fractional_exponent(0.5, 2.0) == 1.0);
  // The optimum minimizes the rate over a.
  const double a_star = optimal_fractional_exponent(2.0, 2.0);
  CHECK(fractional_rate(a_star, 2.0, 2.0) < fractional_rate(a_star + 0.01, 2.0, 2.0));
  CHECK(fractional_rate(a_star, 2.0, 2.0) < fractional_rate(a_star - 0.01, 2.0, 2.0));

  c.a = 0.0;
  CHECK_THROWS_AS(fractional_moment_scan(c), std::invalid_argument);
  c.a = 1.2;
  CHECK_THROWS_AS(fractional_moment_scan(c), std::invalid_argument);

  // Decomposition bound at n1 = 0 is log 1 = 0.
  CHECK(decomposition_log_bound(0.3, 2.0, 2.0, VarianceProfile::linear_decreasing(8), 0) == 0.0);
  CHECK_THROWS_AS(decomposition_log_bound(0.6, 2.0, 2.0, VarianceProfile::linear_decreasing(8), 4),
                  std::invalid_argument);
}

TEST_CASE("Kahane comparison") {
  ExperimentConfig c = base({6}, {1.0}, 5000);
  const KahaneResult flat = kahane_check(c);
  CHECK(flat.pass);
  CHECK(std::fabs(flat.records[0].difference) < 4 * flat.records[0].std_error);

  c.profile = ProfileSpec::linear();
  const KahaneResult lin = kahane_check(c);
  CHECK(lin.pass);
  CHECK(lin.records[0].difference > 0.0);

  c.a = 1.0;
  const KahaneResult one = kahane_check(c);
  CHECK(std::fabs(one.records[0].mean_W_a - 1.0) < 4 * one.scan.find("W^a", 6, 1.0)->std_error);
  CHECK(std::fabs(one.records[0].mean_Wbar_a - 1.0) < 4 * one.scan.find("Wbar^a", 6, 1.0)->std_error);

  c.profile = ProfileSpec::table({0.0, 0.5, 1.0}, {1.0, 1.2, 0.5});
  CHECK_THROWS_WITH_AS(kahane_check(c), "kernel domination violated", std::invalid_argument);
}

TEST_CASE("critical fit needs a long n list") {
  ExperimentConfig c = base({4, 6, 8}, {0.5}, 20);
  CHECK_THROWS_WITH_AS(critical_decay_fit(c), "n list too short", std::invalid_argument);
  c.n_list = {4, 8};
  CHECK_THROWS_AS(critical_decay_fit(c), std::invalid_argument);
  c.n_list = {3, 6, 9};
  const CriticalFitResult f = critical_decay_fit(c);
  CHECK(f.scan.scalars.at("beta_c") == critical_constants(2).beta_c);
  CHECK(std::isfinite(f.fit.slope));
  CHECK(f.scan.find("sqrt_n_Wbar", 9)->count == 20);
}

TEST_CASE("good environments") {
  ExperimentConfig c = base({8}, {0.9}, 500);
  c.profile = ProfileSpec::linear();
  c.barrier = {1.2, 2};
  c.n0_list = {2, 9};
  const ScanResult r = good_env_mass(c);
  CHECK(r.find("K_n0=9", 8, 0.9)->mean == 0.0);
  CHECK(r.find("Kbar_n0=9", 8, 0.9)->mean == 0.0);
  CHECK(r.find("J/W_n0=9", 8, 0.9)->mean == 1.0);
  for (const ScanRow& row : r.rows)
    if (row.statistic.rfind("J", 0) == 0) {
      CHECK(row.ci_lo <= row.mean);
      CHECK(row.mean >= 0.0);
      CHECK(row.mean <= 1.0);
    }

  c.barrier = {1e6, 1};
  c.n0_list.clear();
  const ScanResult loose = good_env_mass(c);
  CHECK(loose.find("K_n0=1", 8, 0.9)->mean == 0.0);
  CHECK(loose.find("J/W_n0=1", 8, 0.9)->mean == 1.0);

  int warnings = 0;
  auto prev = set_warning_sink([&](std::string_view) { ++warnings; });
  c.barrier = {0.5, 2};
  good_env_mass(c);
  set_warning_sink(prev);
  CHECK(warnings == 1);
}

TEST_CASE("CREM scan") {
  ExperimentConfig c = base({6}, {0.7}, 4000);
  c.crem = CremProfile::piecewise({0.0, 0.5, 1.0}, {0.0, 0.7, 1.0}, 1.4);
  const ScanResult r = crem_scan(c);
  const ScanRow* z = r.find("Z", 6, 0.7);
  CHECK(std::fabs(z->mean - 1.0) < 4 * z->std_error);
  const ScanRow* mc = r.find("mc_second_moment", 6, 0.7);
  CHECK(std::fabs(mc->mean - r.find("exact_second_moment", 6, 0.7)->mean) < 4 * mc->std_error);
}

TEST_CASE("parallel_for rethrows worker exceptions") {
  CHECK_THROWS_AS(parallel_for(100, 3,
                               [](std::uint64_t i) {
                                 if (i == 57) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
}
