#include "brwlab/crem.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "brwlab/log.hpp"
#include "brwlab/rng.hpp"
#include "engine.hpp"

namespace brwlab {

CremProfile CremProfile::identity() {
  CremProfile p;
  p.x_ = {0.0, 1.0};
  p.a_ = {0.0, 1.0};
  p.a_prime_0_ = 1.0;
  p.identity_ = true;
  return p;
}

CremProfile CremProfile::piecewise(std::vector<double> knots_x, std::vector<double> knots_a,
                                   double a_prime_0) {
  if (knots_x.size() != knots_a.size() || knots_x.size() < 2)
    throw std::invalid_argument("CREM profile needs matching knots (at least 2)");
  if (knots_x.front() != 0.0 || knots_x.back() != 1.0)
    throw std::invalid_argument("CREM profile knots must span [0, 1]");
  if (knots_a.front() != 0.0 || knots_a.back() != 1.0)
    throw std::invalid_argument("CREM profile needs A(0) = 0 and A(1) = 1");
  for (std::size_t i = 1; i < knots_x.size(); ++i) {
    if (!(knots_x[i] > knots_x[i - 1]))
      throw std::invalid_argument("CREM profile knots must increase");
    if (!(knots_a[i] >= knots_a[i - 1]))
      throw std::invalid_argument("CREM profile A must be nondecreasing");
  }
  if (!std::isfinite(a_prime_0)) throw std::invalid_argument("A'(0) must be finite");
  CremProfile p;
  p.identity_ = knots_x.size() == 2 && a_prime_0 == 1.0;
  p.x_ = std::move(knots_x);
  p.a_ = std::move(knots_a);
  p.a_prime_0_ = a_prime_0;
  return p;
}

double CremProfile::A(double x) const {
  if (identity_) return std::clamp(x, 0.0, 1.0);
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  std::size_t k = 1;
  while (x_[k] < x) ++k;
  const double w = (x - x_[k - 1]) / (x_[k] - x_[k - 1]);
  return a_[k - 1] + w * (a_[k] - a_[k - 1]);
}

std::vector<double> CremProfile::edge_variances(int n) const {
  if (n < 0) throw std::invalid_argument("negative depth");
  std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
  const double dn = static_cast<double>(n);
  for (int k = 1; k <= n; ++k) {
    v[static_cast<std::size_t>(k)] =
        identity_ ? 1.0
                  : std::max(0.0, dn * (A(static_cast<double>(k) / dn) -
                                        A(static_cast<double>(k - 1) / dn)));
  }
  return v;
}

bool CremProfile::satisfies_slope_bound() const {
  for (std::size_t i = 1; i < x_.size(); ++i) {
    const double slope = (a_[i] - a_[i - 1]) / (x_[i] - x_[i - 1]);
    if (slope > a_prime_0_ + 1e-12) return false;
  }
  return true;
}

LogWeight crem_partition(int n, double beta, const CremProfile& profile, std::uint64_t seed) {
  if (n < 0) throw std::invalid_argument("negative depth");
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be nonnegative");
  if (beta == 0.0) return LogWeight::one();
  const std::vector<double> var = profile.edge_variances(n);
  std::vector<double> scale(var.size(), 0.0);
  for (std::size_t k = 1; k < var.size(); ++k) scale[k] = std::sqrt(var[k]);
  detail::EngineInput in;
  in.beta = beta;
  in.scale = scale;
  const detail::EngineResult r = detail::run_dary(2, n, seed, in);
  return {detail::finalize_log(r.scaled.log_sum(), beta, static_cast<double>(n), n,
                               std::log(2.0))};
}

double crem_beta_c(const CremProfile& profile) {
  if (!(profile.a_prime_0() > 0.0)) throw std::invalid_argument("A'(0) must be positive");
  if (!profile.satisfies_slope_bound())
    warn("CREM profile has slopes above A'(0); the critical value assumes sup A' <= A'(0)");
  return std::sqrt(2.0 * std::numbers::ln2) / std::sqrt(profile.a_prime_0());
}

double crem_second_moment(int n, double beta, const CremProfile& profile) {
  if (n < 0) throw std::invalid_argument("negative depth");
  const std::vector<double> var = profile.edge_variances(n);
  std::vector<double> cumulative(var.size(), 0.0);
  for (std::size_t k = 1; k < var.size(); ++k) cumulative[k] = cumulative[k - 1] + var[k];
  return detail::second_moment_series(2, cumulative, beta);
}

std::vector<LogWeight> DyadicMeasure::level(int k) const {
  if (k < 0 || k > depth) throw std::invalid_argument("level out of range");
  std::vector<LogWeight> cur = masses;
  for (int m = depth; m > k; --m) {
    std::vector<LogWeight> up(cur.size() / 2);
    for (std::size_t i = 0; i < up.size(); ++i) up[i] = combine(cur[2 * i], cur[2 * i + 1]);
    cur = std::move(up);
  }
  return cur;
}

LogWeight DyadicMeasure::total_mass() const { return level(0).front(); }

DyadicMeasure cascade_measure(int m, double beta, std::uint64_t seed) {
  if (m < 0) throw std::invalid_argument("negative depth");
  if (m > kCascadeMaxDepth) throw std::invalid_argument("depth cap");
  DyadicMeasure mu;
  mu.depth = m;
  mu.masses.resize(std::size_t{1} << m);
  const double drift = -0.5 * beta * beta;
  const double cell = -static_cast<double>(m) * std::numbers::ln2;

  // Level-by-level within blocks of at most 2^12 cells, natural cell order.
  const int block = std::min(m, 12);
  const int top = m - block;
  const std::size_t width = std::size_t{1} << block;
  std::vector<std::uint64_t> key(width), next_key(width);
  std::vector<double> acc(width), next_acc(width);
  for (std::size_t t = 0; t < (std::size_t{1} << top); ++t) {
    std::uint64_t k = root_key(seed);
    double a = 0.0;
    for (int g = top - 1; g >= 0; --g) {
      k = child_key(k, (t >> g) & 1u);
      a += beta * vertex_gaussian(k) + drift;
    }
    key[0] = k;
    acc[0] = a;
    std::size_t size = 1;
    for (int g = 0; g < block; ++g) {
      for (std::size_t p = 0; p < size; ++p) {
        for (std::uint64_t c = 0; c < 2; ++c) {
          const std::uint64_t ck = child_key(key[p], c);
          next_key[2 * p + c] = ck;
          next_acc[2 * p + c] = acc[p] + (beta * vertex_gaussian(ck) + drift);
        }
      }
      std::swap(key, next_key);
      std::swap(acc, next_acc);
      size *= 2;
    }
    for (std::size_t j = 0; j < size; ++j) mu.masses[t * width + j] = {acc[j] + cell};
  }
  return mu;
}

}  // namespace brwlab
