"""Regenerates include/brwlab/detail/exp_table.hpp: 2^(j/64) for the vector exp."""
import struct

import mpmath as mp

mp.mp.dps = 50
N = 64


def bits(x):
    return struct.unpack("<Q", struct.pack("<d", x))[0]


def main():
    out = ["// Generated by tools/gen_exp_table.py. Do not edit.", "#pragma once", "",
           "#include <cstdint>", "", "namespace brwlab::detail {", "",
           f"inline constexpr int kExpTableBits = {N.bit_length() - 1};", "",
           "/// bits(2^(j/64)) - (j << 46): adding k << 46 yields 2^(k/64) directly.",
           f"inline constexpr std::uint64_t kExpTable[{N}] = {{"]
    for j in range(N):
        v = float(mp.power(2, mp.mpf(j) / N))
        out.append(f"    0x{(bits(v) - (j << 46)) % (1 << 64):016x}ULL,")
    out += ["};", "", "}  // namespace brwlab::detail", ""]
    print("\n".join(out))


if __name__ == "__main__":
    main()
