#include "engine.hpp"

#include <algorithm>
#include <cstring>
#include <limits>

#include "brwlab/rng.hpp"

namespace brwlab::detail {

namespace {

constexpr std::size_t kMaxBlockLeaves = 4096;
constexpr std::uint64_t kGaussianSalt = kStreamSalt[static_cast<int>(Stream::gaussian)];

struct BlockSum {
  double max = kNegInf;
  double s = 0.0;
  double t = 0.0;
};

struct Level {
  std::vector<std::uint64_t> key;
  std::vector<double> h;
  std::vector<double> hs;
  std::vector<std::uint8_t> alive;
  std::vector<std::uint8_t> alive_s;

  void resize(std::size_t n) {
    key.resize(n);
    h.resize(n);
    hs.resize(n);
    alive.resize(n);
    alive_s.resize(n);
  }
};

struct Workspace {
  Level level[2];
  std::vector<double> w;
  std::vector<double> x;
  std::vector<std::uint8_t> ok;

  void reserve(std::size_t n) {
    level[0].resize(n);
    level[1].resize(n);
    w.resize(n);
    x.resize(n);
    ok.resize(n);
  }
};

Workspace& workspace() {
  thread_local Workspace ws;
  return ws;
}

void expand_keys(const std::uint64_t* __restrict parent, std::uint64_t* __restrict child,
                 std::size_t size, std::size_t d) {
  for (std::size_t c = 0; c < d; ++c) {
    const std::uint64_t inc = (c + 1) * kGolden;
    std::uint64_t* __restrict out = child + c * size;
    for (std::size_t p = 0; p < size; ++p) out[p] = mix64(parent[p] + inc);
  }
}

/// Rectangle-only ziggurat draws; ok[j] = 0 marks the draws needing the full sampler.
void draw_fast(const std::uint64_t* __restrict key, double* __restrict w,
               std::uint8_t* __restrict ok, std::size_t count) {
  for (std::size_t j = 0; j < count; ++j) {
    double v;
    ok[j] = ziggurat_fast(mix64(key[j] ^ kGaussianSalt), v);
    w[j] = v;
  }
}

/// Redraws the rare rejected entries with the full sampler.
void fix_rejections(const std::uint64_t* key, double* w, const std::uint8_t* ok,
                    std::size_t count) {
  constexpr std::uint64_t kAllOk = 0x0101010101010101ULL;
  std::size_t j = 0;
  for (; j + 8 <= count; j += 8) {
    std::uint64_t word;
    std::memcpy(&word, ok + j, 8);
    if (word == kAllOk) continue;
    for (std::size_t i = j; i < j + 8; ++i)
      if (!ok[i]) w[i] = gaussian_from_stream(key[i] ^ kGaussianSalt);
  }
  for (; j < count; ++j)
    if (!ok[j]) w[j] = gaussian_from_stream(key[j] ^ kGaussianSalt);
}

void advance(const double* __restrict parent, const double* __restrict w, double* __restrict out,
             std::size_t size) {
  for (std::size_t p = 0; p < size; ++p) out[p] = parent[p] + w[p];
}

void advance_scaled(const double* __restrict parent, const double* __restrict w, double scale,
                    double* __restrict out, std::size_t size) {
  for (std::size_t p = 0; p < size; ++p) out[p] = parent[p] + scale * w[p];
}

void update_mask(const std::uint8_t* __restrict parent, const double* __restrict h,
                 double threshold, std::uint8_t* __restrict out, std::size_t size) {
  for (std::size_t p = 0; p < size; ++p)
    out[p] = static_cast<std::uint8_t>(parent[p] & static_cast<std::uint8_t>(h[p] < threshold));
}

/// Sum of exp(beta * h[j]) over the (masked) block, as max and shifted sums.
BlockSum reduce_block(const double* __restrict h, const std::uint8_t* __restrict mask,
                      std::size_t count, double beta, bool with_t, double* __restrict x) {
  double m = kNegInf;
  if (mask) {
#pragma omp simd reduction(max : m)
    for (std::size_t j = 0; j < count; ++j) {
      const double v = mask[j] ? beta * h[j] : kNegInf;
      x[j] = v;
      m = v > m ? v : m;
    }
  } else {
#pragma omp simd reduction(max : m)
    for (std::size_t j = 0; j < count; ++j) {
      const double v = beta * h[j];
      x[j] = v;
      m = v > m ? v : m;
    }
  }
  BlockSum out;
  if (m == kNegInf) return out;
  out.max = m;
  double s = 0.0;
#pragma omp simd reduction(+ : s)
  for (std::size_t j = 0; j < count; ++j) s += fast_exp_nonpositive(x[j] - m);
  out.s = s;
  if (with_t) {
    double t = 0.0;
#pragma omp simd reduction(+ : t)
    for (std::size_t j = 0; j < count; ++j) t += x[j] * fast_exp_nonpositive(x[j] - m);
    out.t = t;
  }
  return out;
}

std::size_t count_alive(const std::uint8_t* mask, std::size_t count) {
  std::size_t alive = 0;
  for (std::size_t j = 0; j < count; ++j) alive += mask[j];
  return alive;
}

struct VertexState {
  std::uint64_t key;
  double h;
  double hs;
  std::uint8_t alive;
  std::uint8_t alive_s;
};

class DaryKernel {
 public:
  DaryKernel(int d, int n, const EngineInput& in, EngineResult& out)
      : d_(d), n_(n), in_(in), out_(out), ws_(workspace()) {
    block_depth_ = 0;
    std::size_t leaves = 1;
    while (block_depth_ < n_ && leaves * static_cast<std::size_t>(d_) <= kMaxBlockLeaves) {
      leaves *= static_cast<std::size_t>(d_);
      ++block_depth_;
    }
    ws_.reserve(leaves);
  }

  int block_depth() const { return block_depth_; }

  void run_block(const VertexState& root, int generation) {
    Level* cur = &ws_.level[0];
    Level* nxt = &ws_.level[1];
    cur->key[0] = root.key;
    cur->h[0] = root.h;
    cur->hs[0] = root.hs;
    cur->alive[0] = root.alive;
    cur->alive_s[0] = root.alive_s;
    std::size_t size = 1;
    const std::size_t d = static_cast<std::size_t>(d_);

    for (int T = generation + 1; T <= n_; ++T) {
      const std::size_t count = size * d;
      expand_keys(cur->key.data(), nxt->key.data(), size, d);
      double* w = ws_.w.data();
      std::uint8_t* ok = ws_.ok.data();
      draw_fast(nxt->key.data(), w, ok, count);
      fix_rejections(nxt->key.data(), w, ok, count);

      const double sc = in_.scale[static_cast<std::size_t>(T)];
      for (std::size_t c = 0; c < d; ++c) {
        const std::size_t off = c * size;
        advance(cur->h.data(), w + off, nxt->h.data() + off, size);
        advance_scaled(cur->hs.data(), w + off, sc, nxt->hs.data() + off, size);
      }
      if (in_.barrier) {
        const double tp = in_.threshold_plain[static_cast<std::size_t>(T)];
        const double ts = in_.threshold_scaled[static_cast<std::size_t>(T)];
        for (std::size_t c = 0; c < d; ++c) {
          const std::size_t off = c * size;
          update_mask(cur->alive.data(), nxt->h.data() + off, tp, nxt->alive.data() + off, size);
          update_mask(cur->alive_s.data(), nxt->hs.data() + off, ts, nxt->alive_s.data() + off,
                      size);
        }
      }
      std::swap(cur, nxt);
      size = count;
    }

    double* x = ws_.x.data();
    const double beta = in_.beta;
    out_.leaves += size;
    if (!in_.restricted_only) {
      const BlockSum plain = reduce_block(cur->h.data(), nullptr, size, beta, in_.derivative, x);
      out_.plain.add_scaled(plain.max, plain.s, plain.t);
      const BlockSum scaled = reduce_block(cur->hs.data(), nullptr, size, beta, false, x);
      out_.scaled.add_scaled(scaled.max, scaled.s, scaled.t);
      if (in_.barrier) {
        // A block the barrier never touched reuses the unrestricted sum so that
        // J == W holds exactly when nothing binds.
        const BlockSum jp = count_alive(cur->alive.data(), size) == size
                                ? plain
                                : reduce_block(cur->h.data(), cur->alive.data(), size, beta, false, x);
        out_.plain_restricted.add_scaled(jp.max, jp.s, 0.0);
        const BlockSum js =
            count_alive(cur->alive_s.data(), size) == size
                ? scaled
                : reduce_block(cur->hs.data(), cur->alive_s.data(), size, beta, false, x);
        out_.scaled_restricted.add_scaled(js.max, js.s, 0.0);
      }
    } else {
      const BlockSum jp = reduce_block(cur->h.data(), cur->alive.data(), size, beta, false, x);
      out_.plain_restricted.add_scaled(jp.max, jp.s, 0.0);
      const BlockSum js = reduce_block(cur->hs.data(), cur->alive_s.data(), size, beta, false, x);
      out_.scaled_restricted.add_scaled(js.max, js.s, 0.0);
    }
  }

 private:
  int d_;
  int n_;
  int block_depth_;
  const EngineInput& in_;
  EngineResult& out_;
  Workspace& ws_;
};

void add_root_leaf(const EngineInput& in, EngineResult& out) {
  out.plain.add(0.0);
  out.scaled.add(0.0);
  out.plain_restricted.add(0.0);
  out.scaled_restricted.add(0.0);
  out.leaves = 1;
  (void)in;
}

}  // namespace

EngineResult run_dary(int d, int n, std::uint64_t seed, const EngineInput& in) {
  EngineResult out;
  if (n == 0) {
    add_root_leaf(in, out);
    return out;
  }
  DaryKernel kernel(d, n, in, out);
  const int top = n - kernel.block_depth();
  const VertexState root{root_key(seed), 0.0, 0.0, 1, 1};
  if (top == 0) {
    kernel.run_block(root, 0);
    return out;
  }

  struct Frame {
    VertexState v;
    int next;
  };
  std::vector<Frame> stack;
  stack.reserve(static_cast<std::size_t>(top) + 1);
  stack.push_back({root, 0});
  while (!stack.empty()) {
    Frame& fr = stack.back();
    if (fr.next == d) {
      stack.pop_back();
      continue;
    }
    const int c = fr.next++;
    const VertexState parent = fr.v;
    const int T = static_cast<int>(stack.size());
    VertexState child;
    child.key = child_key(parent.key, static_cast<std::uint64_t>(c));
    const double w = vertex_gaussian(child.key);
    child.h = parent.h + w;
    child.hs = parent.hs + in.scale[static_cast<std::size_t>(T)] * w;
    child.alive = 1;
    child.alive_s = 1;
    if (in.barrier) {
      child.alive = static_cast<std::uint8_t>(
          parent.alive & (child.h < in.threshold_plain[static_cast<std::size_t>(T)]));
      child.alive_s = static_cast<std::uint8_t>(
          parent.alive_s & (child.hs < in.threshold_scaled[static_cast<std::size_t>(T)]));
      if (in.restricted_only && !child.alive && !child.alive_s) continue;
    }
    if (T == top) {
      kernel.run_block(child, T);
    } else {
      stack.push_back({child, 0});
    }
  }
  return out;
}

EngineResult run_general(const OffspringLaw& law, int n, std::uint64_t seed,
                         std::uint64_t resample, const EngineInput& in) {
  EngineResult out;
  if (n == 0) {
    add_root_leaf(in, out);
    return out;
  }
  const std::size_t levels = static_cast<std::size_t>(n) + 1;
  std::vector<double> h(levels, 0.0), hs(levels, 0.0);
  std::vector<std::uint8_t> alive(levels, 1), alive_s(levels, 1);
  const double beta = in.beta;
  depth_first(
      law, seed, n, resample,
      [&](int gen, std::uint32_t, std::uint64_t key) {
        const auto g = static_cast<std::size_t>(gen);
        const double w = vertex_gaussian(key);
        h[g] = h[g - 1] + w;
        hs[g] = hs[g - 1] + in.scale[g] * w;
        if (in.barrier) {
          alive[g] = static_cast<std::uint8_t>(alive[g - 1] & (h[g] < in.threshold_plain[g]));
          alive_s[g] = static_cast<std::uint8_t>(alive_s[g - 1] & (hs[g] < in.threshold_scaled[g]));
          if (in.restricted_only && !alive[g] && !alive_s[g]) return false;
        }
        if (gen == n) {
          ++out.leaves;
          if (!in.restricted_only) {
            out.plain.add(beta * h[g]);
            out.scaled.add(beta * hs[g]);
          }
          if (in.barrier) {
            if (alive[g]) out.plain_restricted.add(beta * h[g]);
            if (alive_s[g]) out.scaled_restricted.add(beta * hs[g]);
          }
        }
        return true;
      },
      [](int) {});
  return out;
}

}  // namespace brwlab::detail
