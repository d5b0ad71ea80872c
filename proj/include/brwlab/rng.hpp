#pragma once

// Addressable random draws.
//
// Every random number in the library is a pure function of a SplitKey: the
// replica seed, the vertex path from the root, and a stream tag. Nothing is
// drawn from shared sequential state, so a vertex sees the same Gaussian no
// matter which traversal order, thread, or tree-shape resample reached it.
//
// Algorithm (frozen; changing any constant changes every result):
//   mix64(z)             splitmix64 output finalizer (Stafford variant 13)
//   root_key(seed)       = mix64(seed + kRootSalt)
//   child_key(k, i)      = mix64(k + (i + 1) * kGolden)
//   stream_key(k, s, j)  = k ^ kStreamSalt[s] ^ (j * kSubstreamMul)
//   draw_bits(sk, c)     = mix64(sk + c * kGolden),  c = 0, 1, 2, ...
// Gaussians use a 256-layer ziggurat over draw_bits(sk, 0), draw_bits(sk, 1),
// ... (rejections consume further counters of the same key).
//
// Collisions: two distinct vertices share a 64-bit key with probability about
// N^2 / 2^65 for N vertices, i.e. below 1e-5 for the 2^25-vertex trees used here.

#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "brwlab/detail/ziggurat_tables.hpp"

namespace brwlab {

enum class Stream : std::uint8_t { tree_shape = 0, gaussian = 1 };

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
inline constexpr std::uint64_t kRootSalt = 0x6a09e667f3bcc909ULL;
inline constexpr std::uint64_t kSubstreamMul = 0xd1b54a32d192ed03ULL;
inline constexpr std::uint64_t kReplicaSalt = 0x3c6ef372fe94f82bULL;
inline constexpr std::uint64_t kStreamSalt[2] = {0xa54ff53a5f1d36f1ULL,
                                                 0x510e527fade682d1ULL};

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t root_key(std::uint64_t seed) { return mix64(seed + kRootSalt); }

constexpr std::uint64_t child_key(std::uint64_t parent, std::uint64_t child_index) {
  return mix64(parent + (child_index + 1) * kGolden);
}

constexpr std::uint64_t stream_key(std::uint64_t vertex_key, Stream s,
                                   std::uint64_t substream = 0) {
  return vertex_key ^ kStreamSalt[static_cast<int>(s)] ^ (substream * kSubstreamMul);
}

constexpr std::uint64_t draw_bits(std::uint64_t skey, std::uint64_t counter) {
  return mix64(skey + counter * kGolden);
}

/// Seed of replica `replica` in an ensemble with base seed `base`.
constexpr std::uint64_t replica_seed(std::uint64_t base, std::uint64_t replica) {
  return mix64(base ^ mix64(replica + kReplicaSalt));
}

/// Uniform on [0, 1) with 53 random bits.
inline double unit_uniform(std::uint64_t bits) {
  return static_cast<double>(static_cast<std::int64_t>(bits >> 11)) * 0x1.0p-53;
}

/// Uniform on (0, 1), never 0 or 1.
inline double open_uniform(std::uint64_t bits) {
  return (static_cast<double>(static_cast<std::int64_t>(bits >> 12)) + 0.5) * 0x1.0p-52;
}

/// The ziggurat rectangle test. Accepts about 99% of draws using only a table
/// lookup, a multiply and a compare, which keeps it vectorizable.
inline bool ziggurat_fast(std::uint64_t bits, double& out) {
  const std::uint64_t layer = bits & 0xff;
  // 52 high bits as the mantissa of a double in [1, 2), mapped to [-1, 1).
  const double f = std::bit_cast<double>((bits >> 12) | 0x3ff0000000000000ULL);
  const double u = 2.0 * f - 3.0;
  const double x = u * detail::kZigX[layer];
  out = x;
  return std::fabs(x) < detail::kZigX[layer + 1];
}

/// Standard normal draw for a stream key (full ziggurat including the
/// wedge and tail paths).
double gaussian_from_stream(std::uint64_t skey);

/// Gaussian of vertex `vertex_key` in the gaussian stream, substream 0.
inline double vertex_gaussian(std::uint64_t vertex_key) {
  const std::uint64_t sk = stream_key(vertex_key, Stream::gaussian);
  double x;
  if (ziggurat_fast(draw_bits(sk, 0), x)) return x;
  return gaussian_from_stream(sk);
}

/// Full address of a draw.
struct SplitKey {
  std::uint64_t seed = 0;
  std::vector<std::uint32_t> path;
  Stream stream = Stream::gaussian;
  /// Independent substream selector; tree shapes use it as the resample index.
  std::uint64_t substream = 0;
};

/// Folds a root path into a vertex key.
std::uint64_t vertex_key(std::uint64_t seed, std::span<const std::uint32_t> path);

/// Deterministic standard normal for `key`.
double gaussian_at(const SplitKey& key);

/// Deterministic uniform on (0, 1) for `key`.
double uniform_at(const SplitKey& key);

}  // namespace brwlab
