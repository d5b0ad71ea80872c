#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "brwlab/rng.hpp"
#include "brwlab/stats.hpp"
#include "brwlab/tree.hpp"

using namespace brwlab;

TEST_CASE("complete d-ary trees stream every leaf once in lexicographic order") {
  for (int d : {2, 3}) {
    TreeStream t{OffspringLaw::deterministic(d), 4, 17, SurvivalMode::raw};
    const auto leaves = collect_leaves(t);
    REQUIRE(leaves.size() == static_cast<std::size_t>(std::pow(d, 4)));
    for (std::size_t i = 1; i < leaves.size(); ++i) CHECK(leaves[i - 1].path < leaves[i].path);
    CHECK(leaf_count(t) == leaves.size());
  }
}

TEST_CASE("leaf draws are the vertex gaussians along the path") {
  TreeStream t{OffspringLaw::deterministic(3), 3, 5, SurvivalMode::raw};
  int seen = 0;
  stream_leaves(t, [&](const LeafView& v) {
    REQUIRE(v.path.size() == 3);
    REQUIRE(v.draws.size() == 3);
    std::vector<std::uint32_t> prefix;
    for (std::size_t g = 0; g < 3; ++g) {
      prefix.push_back(v.path[g]);
      CHECK(v.draws[g] == vertex_gaussian(vertex_key(5, prefix)));
    }
    ++seen;
  });
  CHECK(seen == 27);
}

TEST_CASE("pair counts by overlap match brute force") {
  for (int d : {2, 3}) {
    for (int n : {1, 2, 3}) {
      TreeStream t{OffspringLaw::deterministic(d), n, 1, SurvivalMode::raw};
      const auto leaves = collect_leaves(t);
      std::vector<std::uint64_t> brute(n + 1, 0);
      for (const auto& x : leaves)
        for (const auto& y : leaves) ++brute[overlap(x, y)];
      std::uint64_t total = 0;
      for (int h = 0; h <= n; ++h) {
        CHECK(pair_count_dary(d, n, h) == brute[h]);
        total += brute[h];
      }
      CHECK(total == leaves.size() * leaves.size());
    }
  }
}

TEST_CASE("offspring laws: pgf and mean against closed forms") {
  const OffspringLaw p = OffspringLaw::poisson(1.5);
  CHECK(p.mean() == 1.5);
  for (double s : {0.0, 0.3, 0.9}) CHECK(p.pgf(s) == doctest::Approx(std::exp(1.5 * (s - 1))).epsilon(1e-12));
  CHECK(p.truncation_mass() < 1e-40);
  const OffspringLaw g = OffspringLaw::geometric(0.4);
  CHECK(g.mean() == doctest::Approx(1.5));
  CHECK(g.pgf(0.5) == doctest::Approx(0.4 / (1 - 0.6 * 0.5)).epsilon(1e-9));
  const OffspringLaw b = OffspringLaw::binomial(4, 0.5);
  CHECK(b.mean() == 2.0);
  CHECK(b.pgf(0.0) == doctest::Approx(1.0 / 16));
  const OffspringLaw tab = OffspringLaw::table({1, 1, 2});
  CHECK(tab.mean() == doctest::Approx(1.25));
  CHECK_THROWS_AS(OffspringLaw::deterministic(0), std::invalid_argument);
  CHECK_THROWS_AS(OffspringLaw::poisson(-1), std::invalid_argument);
}

TEST_CASE("Galton-Watson leaf counts: raw and survival-conditioned means") {
  const double m = 1.5;
  const int n = 4;
  const OffspringLaw law = OffspringLaw::poisson(m);
  const std::uint64_t R = 20000;
  // E Z_n = m^n; Var Z_n = s2 m^(n-1) (m^n - 1) / (m - 1), s2 = m for Poisson.
  EnsembleSummary raw, cond;
  for (std::uint64_t r = 0; r < R; ++r) {
    raw.add(static_cast<double>(leaf_count({law, n, replica_seed(9, r), SurvivalMode::raw})));
    cond.add(static_cast<double>(leaf_count({law, n, replica_seed(9, r), SurvivalMode::conditioned})));
  }
  const double mn = std::pow(m, n);
  const double var = m * std::pow(m, n - 1) * (mn - 1) / (m - 1);
  CHECK(std::fabs(raw.mean - mn) < 4 * std::sqrt(var / R));

  // Survival to generation n: 1 - q_n, q_k = f(q_{k-1}), f(s) = e^{m (s - 1)}.
  double q = 0;
  for (int k = 0; k < n; ++k) q = std::exp(m * (q - 1));
  const double cond_mean = mn / (1 - q);
  CHECK(std::fabs(cond.mean - cond_mean) < 4 * cond.stderr_mean());
  CHECK(cond.min >= 1.0);
}

TEST_CASE("conditioning keeps the gaussians of shared vertices") {
  const OffspringLaw law = OffspringLaw::poisson(1.2);
  for (std::uint64_t s = 0; s < 50; ++s) {
    TreeStream t{law, 3, s, SurvivalMode::conditioned};
    stream_leaves(t, [&](const LeafView& v) {
      std::vector<std::uint32_t> prefix(v.path.begin(), v.path.end());
      CHECK(v.draws.back() == vertex_gaussian(vertex_key(s, prefix)));
    });
  }
}

TEST_CASE("depth zero is the root alone") {
  TreeStream t{OffspringLaw::deterministic(2), 0, 1, SurvivalMode::raw};
  CHECK(leaf_count(t) == 1);
}
