#include "brwlab/rng.hpp"

#include "brwlab/log_weight.hpp"

namespace brwlab {

namespace {

using detail::kZigF;
using detail::kZigR;
using detail::kZigX;

}  // namespace

double gaussian_from_stream(std::uint64_t skey) {
  std::uint64_t counter = 0;
  for (;;) {
    const std::uint64_t bits = draw_bits(skey, counter++);
    double x;
    if (ziggurat_fast(bits, x)) return x;
    const unsigned layer = static_cast<unsigned>(bits & 0xff);
    if (layer == 0) {
      // Marsaglia's tail method beyond R.
      double tx, ty;
      do {
        tx = -std::log(open_uniform(draw_bits(skey, counter++))) / kZigR;
        ty = -std::log(open_uniform(draw_bits(skey, counter++)));
      } while (ty + ty < tx * tx);
      return x < 0.0 ? -(kZigR + tx) : kZigR + tx;
    }
    const double y = kZigF[layer + 1] +
                     (kZigF[layer] - kZigF[layer + 1]) * unit_uniform(draw_bits(skey, counter++));
    if (y < detail::fast_exp_nonpositive(-0.5 * x * x)) return x;
  }
}

std::uint64_t vertex_key(std::uint64_t seed, std::span<const std::uint32_t> path) {
  std::uint64_t k = root_key(seed);
  for (std::uint32_t i : path) k = child_key(k, i);
  return k;
}

double gaussian_at(const SplitKey& key) {
  const std::uint64_t sk = stream_key(vertex_key(key.seed, key.path), key.stream, key.substream);
  double x;
  if (ziggurat_fast(draw_bits(sk, 0), x)) return x;
  return gaussian_from_stream(sk);
}

double uniform_at(const SplitKey& key) {
  const std::uint64_t sk = stream_key(vertex_key(key.seed, key.path), key.stream, key.substream);
  return open_uniform(draw_bits(sk, 0));
}

}  // namespace brwlab
