#include "brwlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace brwlab {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p must be in (0, 1)");
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r +
                 67265.770927008700853) * r + 45921.953931549871457) * r +
               13731.693765509461125) * r + 1971.5909503065514427) * r +
             133.14166789178437745) * r + 3.387132872796366608) /
           (((((((r * 5226.495278852545925 + 28729.085735721942674) * r +
                 39307.89580009271061) * r + 21213.794301586595867) * r +
               5394.1960214247511077) * r + 687.1870074920579083) * r +
             42.313330701600911252) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double v;
  if (r <= 5.0) {
    r -= 1.6;
    v = (((((((r * 7.7454501427834140764e-4 + 0.0227238449892691845833) * r +
              0.24178072517745061177) * r + 1.27045825245236838258) * r +
            3.64784832476320460504) * r + 5.7694972214606914055) * r +
          4.6303378461565452959) * r + 1.42343711074968357734) /
        (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r +
              0.0151986665636164571966) * r + 0.14810397642748007459) * r +
            0.68976733498510000455) * r + 1.6763848301838038494) * r +
          2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    v = (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r +
              0.0012426609473880784386) * r + 0.026532189526576123093) * r +
            0.29656057182850489123) * r + 1.7848265399172913358) * r +
          5.4637849111641143699) * r + 6.6579046435011037772) /
        (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r +
              1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
            0.0148753612908506148525) * r + 0.13692988092273580531) * r +
          0.59983220655588793769) * r + 1.0);
  }
  return q < 0.0 ? -v : v;
}

// ---------------------------------------------------------------------------
// QuantileSketch

void QuantileSketch::add(double x) {
  if (levels_.empty()) {
    levels_.emplace_back();
    parity_.push_back(0);
  }
  levels_[0].push_back(x);
  ++count_;
  if (levels_[0].size() >= k_) compact_from(0);
}

void QuantileSketch::compact_from(std::size_t level) {
  for (std::size_t h = level; h < levels_.size() && levels_[h].size() >= k_; ++h) {
    if (h + 1 == levels_.size()) {
      levels_.emplace_back();
      parity_.push_back(0);
    }
    auto& buf = levels_[h];
    std::sort(buf.begin(), buf.end());
    // An odd leftover stays behind so total weight is preserved exactly.
    double leftover = 0.0;
    const bool odd = buf.size() % 2 == 1;
    if (odd) {
      leftover = buf.back();
      buf.pop_back();
    }
    auto& next = levels_[h + 1];
    for (std::size_t i = parity_[h]; i < buf.size(); i += 2) next.push_back(buf[i]);
    parity_[h] ^= 1;
    buf.clear();
    if (odd) buf.push_back(leftover);
  }
}

void QuantileSketch::merge(const QuantileSketch& other) {
  if (other.levels_.size() > levels_.size()) {
    levels_.resize(other.levels_.size());
    parity_.resize(other.levels_.size(), 0);
  }
  for (std::size_t h = 0; h < other.levels_.size(); ++h)
    levels_[h].insert(levels_[h].end(), other.levels_[h].begin(), other.levels_[h].end());
  count_ += other.count_;
  for (std::size_t h = 0; h < levels_.size(); ++h)
    if (levels_[h].size() >= k_) compact_from(h);
}

std::size_t QuantileSketch::retained() const {
  std::size_t n = 0;
  for (const auto& l : levels_) n += l.size();
  return n;
}

double QuantileSketch::quantile(double q) const {
  if (count_ == 0) return std::numeric_limits<double>::quiet_NaN();
  std::vector<std::pair<double, double>> items;
  items.reserve(retained());
  for (std::size_t h = 0; h < levels_.size(); ++h) {
    const double w = std::ldexp(1.0, static_cast<int>(h));
    for (double v : levels_[h]) items.emplace_back(v, w);
  }
  std::sort(items.begin(), items.end());
  double total = 0.0;
  for (const auto& it : items) total += it.second;
  const double target = std::max(1.0, std::ceil(std::clamp(q, 0.0, 1.0) * total));
  double cum = 0.0;
  for (const auto& it : items) {
    cum += it.second;
    if (cum >= target) return it.first;
  }
  return items.back().first;
}

double QuantileSketch::rank(double x) const {
  if (count_ == 0) return 0.0;
  double below = 0.0, total = 0.0;
  for (std::size_t h = 0; h < levels_.size(); ++h) {
    const double w = std::ldexp(1.0, static_cast<int>(h));
    for (double v : levels_[h]) {
      total += w;
      if (v <= x) below += w;
    }
  }
  return below / total;
}

// ---------------------------------------------------------------------------
// EnsembleSummary

void EnsembleSummary::add(double x) {
  ++count;
  if (count == 1) {
    min = max = x;
  } else {
    min = std::min(min, x);
    max = std::max(max, x);
  }
  const double delta = x - mean;
  mean += delta / static_cast<double>(count);
  m2 += delta * (x - mean);
  sketch.add(x);
}

void EnsembleSummary::merge(const EnsembleSummary& other) {
  if (other.count == 0) return;
  if (count == 0) {
    const double level = ci_level;
    *this = other;
    ci_level = level;
    return;
  }
  // Chan et al. pairwise update.
  const double na = static_cast<double>(count);
  const double nb = static_cast<double>(other.count);
  const double n = na + nb;
  const double delta = other.mean - mean;
  mean = (na * mean + nb * other.mean) / n;
  m2 = m2 + other.m2 + delta * delta * na * nb / n;
  count += other.count;
  min = std::min(min, other.min);
  max = std::max(max, other.max);
  sketch.merge(other.sketch);
}

double EnsembleSummary::stderr_mean() const {
  if (count < 2) return 0.0;
  return std::sqrt(variance() / static_cast<double>(count));
}

double EnsembleSummary::ci_half_width() const {
  return normal_quantile(0.5 + 0.5 * ci_level) * stderr_mean();
}

EnsembleSummary summarize(std::span<const double> xs, double ci_level) {
  EnsembleSummary s;
  s.ci_level = ci_level;
  for (double x : xs) s.add(x);
  return s;
}

ProportionInterval wilson_interval(std::uint64_t successes, std::uint64_t trials,
                                   double ci_level) {
  if (trials == 0) return {0.0, 0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z = normal_quantile(0.5 + 0.5 * ci_level);
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {p, std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double correlation(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2) return 0.0;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace brwlab
