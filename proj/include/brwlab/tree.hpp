#pragma once

// Implicit Galton-Watson and complete d-ary trees.
//
// Trees are never stored. A vertex is identified by its root path; its random
// offspring count and its Gaussian weight are pure functions of that path (see
// rng.hpp), drawn from disjoint streams. Conditioning on survival resamples
// only the shape stream, so weights of vertices present in both shapes agree.

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "brwlab/rng.hpp"

namespace brwlab {

enum class OffspringKind { deterministic_d, poisson, geometric, binomial, table };

/// Offspring distribution, truncated at kMaxChildren children.
///
/// Random laws are tabulated on {0, ..., kMaxChildren} and renormalized by the
/// retained mass; `truncation_mass()` reports what was dropped (about 1e-60
/// for Poisson(2)). `mean()` is the analytic mean of the untruncated law.
class OffspringLaw {
 public:
  static constexpr int kMaxChildren = 64;

  static OffspringLaw deterministic(int d);
  static OffspringLaw poisson(double lambda);
  /// P(k) = (1 - p)^k p on {0, 1, ...}; mean (1 - p) / p.
  static OffspringLaw geometric(double p);
  static OffspringLaw binomial(int trials, double p);
  /// probabilities[k] = P(k children); normalized on construction.
  static OffspringLaw table(std::vector<double> probabilities);

  OffspringKind kind() const { return kind_; }
  const std::vector<double>& params() const { return params_; }
  double mean() const { return mean_; }
  double truncated_mean() const;
  double truncation_mass() const { return truncation_mass_; }
  bool is_deterministic() const { return kind_ == OffspringKind::deterministic_d; }
  /// Fixed child count of a deterministic law.
  int arity() const { return arity_; }
  const std::vector<double>& pmf() const { return pmf_; }

  /// Offspring count for a uniform u in (0, 1) by inverse CDF.
  int sample(double u) const;

  /// Probability generating function of the truncated law.
  double pgf(double s) const;

  std::string describe() const;

 private:
  OffspringLaw() = default;
  void finish(double analytic_mean, double tail = 0.0);

  OffspringKind kind_ = OffspringKind::deterministic_d;
  std::vector<double> params_;
  std::vector<double> pmf_;
  std::vector<double> cdf_;
  double mean_ = 0.0;
  double truncation_mass_ = 0.0;
  int arity_ = 0;
};

struct VertexAddress {
  std::vector<std::uint32_t> path;
  std::size_t generation() const { return path.size(); }
  friend bool operator==(const VertexAddress&, const VertexAddress&) = default;
};

enum class SurvivalMode { raw, conditioned };

struct TreeStream {
  OffspringLaw law = OffspringLaw::deterministic(2);
  int depth = 0;
  std::uint64_t seed = 0;
  SurvivalMode survival = SurvivalMode::raw;
};

/// One generation-n vertex: its root path and the Gaussians w(x_1..x_n) along it.
struct LeafView {
  std::span<const std::uint32_t> path;
  std::span<const double> draws;
};

struct StreamStats {
  std::uint64_t leaves = 0;
  std::uint64_t shape_resample = 0;
};

inline constexpr std::uint64_t kMaxShapeResamples = 1'000'000;

/// Number of children of the vertex with key `vkey` under tree-shape resample `resample`.
inline int child_count(const OffspringLaw& law, std::uint64_t vkey, std::uint64_t resample) {
  if (law.is_deterministic()) return law.arity();
  const std::uint64_t sk = stream_key(vkey, Stream::tree_shape, resample);
  return law.sample(open_uniform(draw_bits(sk, 0)));
}

/// Shape resample index used for `t`: 0 in raw mode; in conditioned mode the
/// first index whose tree reaches generation `t.depth`. Throws
/// std::runtime_error("survival conditioning failed") after kMaxShapeResamples.
std::uint64_t resolve_shape(const TreeStream& t);

/// True when the shape with resample index `resample` has a vertex at generation `depth`.
bool shape_survives(const OffspringLaw& law, std::uint64_t seed, int depth,
                    std::uint64_t resample);

/// Depth-first walk of the tree in lexicographic order.
///
/// `on_vertex(generation, child_index, vertex_key)` is called for every non-root
/// vertex up to generation t.depth and returns whether to descend into it;
/// `on_leave(generation)` is called when a descended vertex is finished.
/// The root is generation 0 and is not reported.
template <class OnVertex, class OnLeave>
void depth_first(const OffspringLaw& law, std::uint64_t seed, int depth, std::uint64_t resample,
                 OnVertex&& on_vertex, OnLeave&& on_leave) {
  struct Frame {
    std::uint64_t key;
    int children;
    int next;
  };
  std::vector<Frame> stack;
  stack.reserve(static_cast<std::size_t>(depth) + 1);
  const std::uint64_t root = root_key(seed);
  if (depth == 0) return;
  stack.push_back({root, child_count(law, root, resample), 0});
  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.next == top.children) {
      stack.pop_back();
      if (!stack.empty()) on_leave(static_cast<int>(stack.size()));
      continue;
    }
    const int idx = top.next++;
    const std::uint64_t key = child_key(top.key, static_cast<std::uint64_t>(idx));
    const int gen = static_cast<int>(stack.size());
    const bool descend = on_vertex(gen, static_cast<std::uint32_t>(idx), key);
    if (!descend) continue;
    if (gen == depth) {
      on_leave(gen);
    } else {
      stack.push_back({key, child_count(law, key, resample), 0});
    }
  }
}

/// Streams every generation-n vertex exactly once, depth-first in lexicographic
/// order. Memory is O(depth); the leaf count never affects it.
StreamStats stream_leaves(const TreeStream& t, const std::function<void(const LeafView&)>& visit);

/// Convenience for small trees: materializes the leaves.
std::vector<VertexAddress> collect_leaves(const TreeStream& t);

/// Generation-n population size.
std::uint64_t leaf_count(const TreeStream& t);

/// Length of the common prefix of two generation-n paths.
int overlap(const VertexAddress& x, const VertexAddress& y);

/// Ordered leaf pairs of the complete d-ary tree of depth n with overlap exactly h.
std::uint64_t pair_count_dary(int d, int n, int h);

}  // namespace brwlab
