// Generated by tools/gen_exp_table.py. Do not edit.
#pragma once

#include <cstdint>

namespace brwlab::detail {

inline constexpr int kExpTableBits = 6;

/// bits(2^(j/64)) - (j << 46): adding k << 46 yields 2^(k/64) directly.
inline constexpr std::uint64_t kExpTable[64] = {
    0x3ff0000000000000ULL,
    0x3fefec9a3e778061ULL,
    0x3fefd9b0d3158574ULL,
    0x3fefc74518759bc8ULL,
    0x3fefb5586cf9890fULL,
    0x3fefa3ec32d3d1a2ULL,
    0x3fef9301d0125b51ULL,
    0x3fef829aaea92de0ULL,
    0x3fef72b83c7d517bULL,
    0x3fef635beb6fcb75ULL,
    0x3fef54873168b9aaULL,
    0x3fef463b88628cd6ULL,
    0x3fef387a6e756238ULL,
    0x3fef2b4565e27cddULL,
    0x3fef1e9df51fdee1ULL,
    0x3fef1285a6e4030bULL,
    0x3fef06fe0a31b715ULL,
    0x3feefc08b26416ffULL,
    0x3feef1a7373aa9cbULL,
    0x3feee7db34e59ff7ULL,
    0x3feedea64c123422ULL,
    0x3feed60a21f72e2aULL,
    0x3feece086061892dULL,
    0x3feec6a2b5c13cd0ULL,
    0x3feebfdad5362a27ULL,
    0x3feeb9b2769d2ca7ULL,
    0x3feeb42b569d4f82ULL,
    0x3feeaf4736b527daULL,
    0x3feeab07dd485429ULL,
    0x3feea76f15ad2148ULL,
    0x3feea47eb03a5585ULL,
    0x3feea23882552225ULL,
    0x3feea09e667f3bcdULL,
    0x3fee9fb23c651a2fULL,
    0x3fee9f75e8ec5f74ULL,
    0x3fee9feb564267c9ULL,
    0x3feea11473eb0187ULL,
    0x3feea2f336cf4e62ULL,
    0x3feea589994cce13ULL,
    0x3feea8d99b4492edULL,
    0x3feeace5422aa0dbULL,
    0x3feeb1ae99157736ULL,
    0x3feeb737b0cdc5e5ULL,
    0x3feebd829fde4e50ULL,
    0x3feec49182a3f090ULL,
    0x3feecc667b5de565ULL,
    0x3feed503b23e255dULL,
    0x3feede6b5579fdbfULL,
    0x3feee89f995ad3adULL,
    0x3feef3a2b84f15fbULL,
    0x3feeff76f2fb5e47ULL,
    0x3fef0c1e904bc1d2ULL,
    0x3fef199bdd85529cULL,
    0x3fef27f12e57d14bULL,
    0x3fef3720dcef9069ULL,
    0x3fef472d4a07897cULL,
    0x3fef5818dcfba487ULL,
    0x3fef69e603db3285ULL,
    0x3fef7c97337b9b5fULL,
    0x3fef902ee78b3ff6ULL,
    0x3fefa4afa2a490daULL,
    0x3fefba1bee615a27ULL,
    0x3fefd0765b6e4540ULL,
    0x3fefe7c1819e90d8ULL,
};

}  // namespace brwlab::detail

