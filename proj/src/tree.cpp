#include "brwlab/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace brwlab {

OffspringLaw OffspringLaw::deterministic(int d) {
  if (d < 2) throw std::invalid_argument("subcritical mean");
  if (d > kMaxChildren) throw std::invalid_argument("deterministic arity above 64");
  OffspringLaw law;
  law.kind_ = OffspringKind::deterministic_d;
  law.params_ = {static_cast<double>(d)};
  law.arity_ = d;
  law.pmf_.assign(static_cast<std::size_t>(d) + 1, 0.0);
  law.pmf_[static_cast<std::size_t>(d)] = 1.0;
  law.finish(d);
  return law;
}

OffspringLaw OffspringLaw::poisson(double lambda) {
  if (!(lambda > 1.0)) throw std::invalid_argument("subcritical mean");
  OffspringLaw law;
  law.kind_ = OffspringKind::poisson;
  law.params_ = {lambda};
  auto pmf = [&](int k) { return std::exp(k * std::log(lambda) - lambda - std::lgamma(k + 1.0)); };
  for (int k = 0; k <= kMaxChildren; ++k) law.pmf_.push_back(pmf(k));
  double tail = 0.0;
  for (int k = kMaxChildren + 1; k < kMaxChildren + 2000; ++k) tail += pmf(k);
  law.finish(lambda, tail);
  return law;
}

OffspringLaw OffspringLaw::geometric(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("geometric: p must be in (0, 1)");
  const double mean = (1.0 - p) / p;
  if (!(mean > 1.0)) throw std::invalid_argument("subcritical mean");
  OffspringLaw law;
  law.kind_ = OffspringKind::geometric;
  law.params_ = {p};
  for (int k = 0; k <= kMaxChildren; ++k) law.pmf_.push_back(std::pow(1.0 - p, k) * p);
  law.finish(mean, std::pow(1.0 - p, kMaxChildren + 1));
  return law;
}

OffspringLaw OffspringLaw::binomial(int trials, double p) {
  if (trials < 1 || trials > kMaxChildren)
    throw std::invalid_argument("binomial: trials must be in [1, 64]");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binomial: p must be in [0, 1]");
  const double mean = trials * p;
  if (!(mean > 1.0)) throw std::invalid_argument("subcritical mean");
  OffspringLaw law;
  law.kind_ = OffspringKind::binomial;
  law.params_ = {static_cast<double>(trials), p};
  for (int k = 0; k <= trials; ++k) {
    const double logc = std::lgamma(trials + 1.0) - std::lgamma(k + 1.0) - std::lgamma(trials - k + 1.0);
    const double a = k == 0 ? 0.0 : k * std::log(p);
    const double b = k == trials ? 0.0 : (trials - k) * std::log1p(-p);
    law.pmf_.push_back(std::exp(logc + a + b));
  }
  law.finish(mean);
  return law;
}

OffspringLaw OffspringLaw::table(std::vector<double> probabilities) {
  if (probabilities.empty() || probabilities.size() > kMaxChildren + 1)
    throw std::invalid_argument("table: need 1..65 probabilities");
  double total = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0)) throw std::invalid_argument("table: probabilities must be nonnegative");
    total += p;
  }
  if (!(total > 0.0)) throw std::invalid_argument("table: zero total mass");
  double mean = 0.0;
  for (std::size_t k = 0; k < probabilities.size(); ++k) {
    probabilities[k] /= total;
    mean += static_cast<double>(k) * probabilities[k];
  }
  if (!(mean > 1.0)) throw std::invalid_argument("subcritical mean");
  OffspringLaw law;
  law.kind_ = OffspringKind::table;
  law.params_ = probabilities;
  law.pmf_ = std::move(probabilities);
  law.finish(mean);
  return law;
}

void OffspringLaw::finish(double analytic_mean, double tail) {
  mean_ = analytic_mean;
  const double kept = std::accumulate(pmf_.begin(), pmf_.end(), 0.0);
  truncation_mass_ = tail;
  for (double& p : pmf_) p /= kept;
  cdf_.resize(pmf_.size());
  std::partial_sum(pmf_.begin(), pmf_.end(), cdf_.begin());
  cdf_.back() = 1.0;
}

double OffspringLaw::truncated_mean() const {
  double m = 0.0;
  for (std::size_t k = 0; k < pmf_.size(); ++k) m += static_cast<double>(k) * pmf_[k];
  return m;
}

int OffspringLaw::sample(double u) const {
  if (is_deterministic()) return arity_;
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return static_cast<int>(std::min<std::ptrdiff_t>(it - cdf_.begin(),
                                                   static_cast<std::ptrdiff_t>(cdf_.size()) - 1));
}

double OffspringLaw::pgf(double s) const {
  double acc = 0.0;
  for (std::size_t k = pmf_.size(); k-- > 0;) acc = acc * s + pmf_[k];
  return acc;
}

std::string OffspringLaw::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case OffspringKind::deterministic_d: os << "deterministic(" << arity_ << ")"; break;
    case OffspringKind::poisson: os << "poisson(" << params_[0] << ")"; break;
    case OffspringKind::geometric: os << "geometric(" << params_[0] << ")"; break;
    case OffspringKind::binomial: os << "binomial(" << params_[0] << "," << params_[1] << ")"; break;
    case OffspringKind::table: os << "table(" << pmf_.size() << ")"; break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------

bool shape_survives(const OffspringLaw& law, std::uint64_t seed, int depth,
                    std::uint64_t resample) {
  if (depth == 0 || law.is_deterministic()) return true;
  // Depth-first search that stops at the first generation-`depth` vertex.
  struct Frame {
    std::uint64_t key;
    int children;
    int next;
  };
  std::vector<Frame> stack;
  const std::uint64_t root = root_key(seed);
  stack.push_back({root, child_count(law, root, resample), 0});
  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.next == top.children) {
      stack.pop_back();
      continue;
    }
    const std::uint64_t key = child_key(top.key, static_cast<std::uint64_t>(top.next++));
    if (static_cast<int>(stack.size()) == depth) return true;
    stack.push_back({key, child_count(law, key, resample), 0});
  }
  return false;
}

std::uint64_t resolve_shape(const TreeStream& t) {
  if (t.depth < 0) throw std::invalid_argument("depth must be >= 0");
  if (t.survival == SurvivalMode::raw) return 0;
  for (std::uint64_t r = 0; r < kMaxShapeResamples; ++r)
    if (shape_survives(t.law, t.seed, t.depth, r)) return r;
  throw std::runtime_error("survival conditioning failed");
}

StreamStats stream_leaves(const TreeStream& t, const std::function<void(const LeafView&)>& visit) {
  StreamStats stats;
  stats.shape_resample = resolve_shape(t);
  std::vector<std::uint32_t> path;
  std::vector<double> draws;
  path.reserve(static_cast<std::size_t>(t.depth));
  draws.reserve(static_cast<std::size_t>(t.depth));
  if (t.depth == 0) {
    visit(LeafView{path, draws});
    stats.leaves = 1;
    return stats;
  }
  depth_first(
      t.law, t.seed, t.depth, stats.shape_resample,
      [&](int gen, std::uint32_t idx, std::uint64_t key) {
        path.push_back(idx);
        draws.push_back(vertex_gaussian(key));
        if (gen == t.depth) {
          visit(LeafView{path, draws});
          ++stats.leaves;
        }
        return true;
      },
      [&](int) {
        path.pop_back();
        draws.pop_back();
      });
  return stats;
}

std::vector<VertexAddress> collect_leaves(const TreeStream& t) {
  std::vector<VertexAddress> out;
  stream_leaves(t, [&](const LeafView& leaf) {
    out.push_back(VertexAddress{{leaf.path.begin(), leaf.path.end()}});
  });
  return out;
}

std::uint64_t leaf_count(const TreeStream& t) {
  const std::uint64_t resample = resolve_shape(t);
  if (t.depth == 0) return 1;
  std::uint64_t count = 0;
  depth_first(
      t.law, t.seed, t.depth, resample,
      [&](int gen, std::uint32_t, std::uint64_t) {
        if (gen == t.depth) ++count;
        return true;
      },
      [](int) {});
  return count;
}

int overlap(const VertexAddress& x, const VertexAddress& y) {
  if (x.generation() != y.generation()) throw std::invalid_argument("generation mismatch");
  std::size_t h = 0;
  while (h < x.path.size() && x.path[h] == y.path[h]) ++h;
  return static_cast<int>(h);
}

namespace {

std::uint64_t checked_pow(std::uint64_t base, int exp) {
  std::uint64_t r = 1;
  for (int i = 0; i < exp; ++i) {
    if (r > std::numeric_limits<std::uint64_t>::max() / base)
      throw std::overflow_error("pair_count_dary: count exceeds 64 bits");
    r *= base;
  }
  return r;
}

}  // namespace

std::uint64_t pair_count_dary(int d, int n, int h) {
  if (d < 2) throw std::invalid_argument("pair_count_dary: d must be >= 2");
  if (n < 0 || h < 0 || h > n) throw std::invalid_argument("pair_count_dary: h out of range");
  const auto ud = static_cast<std::uint64_t>(d);
  const std::uint64_t leaves = checked_pow(ud, n);
  if (h == n) return leaves;
  const std::uint64_t partners = (ud - 1) * checked_pow(ud, n - h - 1);
  if (partners != 0 && leaves > std::numeric_limits<std::uint64_t>::max() / partners)
    throw std::overflow_error("pair_count_dary: count exceeds 64 bits");
  return leaves * partners;
}

}  // namespace brwlab
