#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "brwlab/fit.hpp"
#include "brwlab/stats.hpp"

using namespace brwlab;

TEST_CASE("normal quantile and cdf reference values") {
  // scipy.stats.norm
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
  CHECK(normal_quantile(1e-10) == doctest::Approx(-6.361340902404056).epsilon(1e-12));
  CHECK(normal_cdf(1.5) == doctest::Approx(0.9331927987311419).epsilon(1e-14));
  for (double p : {0.01, 0.2, 0.5, 0.9, 0.999}) CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-13));
}

TEST_CASE("wilson interval reference values") {
  // statsmodels proportion_confint(method="wilson")
  const ProportionInterval a = wilson_interval(50, 100, 0.95);
  CHECK(a.estimate == 0.5);
  CHECK(a.lo == doctest::Approx(0.4038315303659956).epsilon(1e-12));
  CHECK(a.hi == doctest::Approx(0.5961684696340044).epsilon(1e-12));
  const ProportionInterval b = wilson_interval(3, 40, 0.90);
  CHECK(b.lo == doctest::Approx(0.030370252611738993).epsilon(1e-12));
  CHECK(b.hi == doctest::Approx(0.17348017873690041).epsilon(1e-12));
}

TEST_CASE("ensemble summary: two-pass moments and CI width") {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd(2.0, 3.0);
  std::vector<double> xs(5000);
  for (double& x : xs) x = nd(gen);
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= xs.size();
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double var = ss / (xs.size() - 1);

  const EnsembleSummary s = summarize(xs, 0.95);
  CHECK(s.count == xs.size());
  CHECK(s.mean == doctest::Approx(mean).epsilon(1e-12));
  CHECK(s.variance() == doctest::Approx(var).epsilon(1e-12));
  CHECK(s.stderr_mean() == doctest::Approx(std::sqrt(var / xs.size())).epsilon(1e-12));
  CHECK(s.ci_half_width() ==
        doctest::Approx(1.959963984540054 * std::sqrt(var / xs.size())).epsilon(1e-12));
  CHECK(s.min == *std::min_element(xs.begin(), xs.end()));
  CHECK(s.max == *std::max_element(xs.begin(), xs.end()));

  EnsembleSummary a, b;
  a.ci_level = b.ci_level = 0.95;
  for (std::size_t i = 0; i < xs.size(); ++i) (i % 3 == 0 ? a : b).add(xs[i]);
  a.merge(b);
  CHECK(a.count == s.count);
  CHECK(a.mean == doctest::Approx(s.mean).epsilon(1e-9));
  CHECK(a.variance() == doctest::Approx(s.variance()).epsilon(1e-9));
}

TEST_CASE("quantile sketch is exact below capacity") {
  QuantileSketch q(1024);
  std::vector<double> xs;
  for (int i = 0; i < 999; ++i) {
    xs.push_back(std::sin(i * 1.7) * 10);
    q.add(xs.back());
  }
  std::sort(xs.begin(), xs.end());
  CHECK(q.quantile(0.5) == xs[499]);
  CHECK(q.quantile(0.0) == xs.front());
  CHECK(q.quantile(1.0) == xs.back());
  CHECK(std::isnan(QuantileSketch().quantile(0.5)));
}

TEST_CASE("quantile sketch median rank error below 1% at 1e6 items") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  QuantileSketch whole, left, right;
  for (int i = 0; i < 1'000'000; ++i) {
    const double x = u(gen);
    whole.add(x);
    (i % 2 ? left : right).add(x);
  }
  left.merge(right);
  CHECK(whole.count() == 1'000'000);
  CHECK(left.count() == 1'000'000);
  // For uniform data the value is its own rank.
  CHECK(std::fabs(whole.quantile(0.5) - 0.5) < 0.01);
  CHECK(std::fabs(left.quantile(0.5) - 0.5) < 0.01);
  CHECK(std::fabs(whole.rank(0.25) - 0.25) < 0.01);
  CHECK(whole.retained() < 20'000);
}

TEST_CASE("log-log fit recovers planted power laws") {
  std::vector<std::pair<double, double>> pts;
  for (double n : {8.0, 12.0, 16.0, 20.0, 24.0}) pts.emplace_back(n, 3.0 / std::sqrt(n));
  const FitResult f = fit_loglog(pts);
  CHECK(f.slope == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(f.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.stderr_slope < 1e-10);

  std::vector<std::pair<double, double>> two = {{1, 1}, {2, 2}};
  CHECK_THROWS_AS(fit_loglog(two), std::invalid_argument);
  std::vector<std::pair<double, double>> neg = {{1, 1}, {2, -2}, {3, 1}};
  CHECK_THROWS_AS(fit_loglog(neg), std::invalid_argument);
}

TEST_CASE("correlation of degenerate input is zero") {
  std::vector<double> a = {1, 1, 1}, b = {1, 2, 3};
  CHECK(correlation(a, b) == 0.0);
  CHECK(correlation(b, b) == doctest::Approx(1.0));
}
