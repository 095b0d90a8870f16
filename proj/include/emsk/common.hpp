#pragma once

#include <cassert>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace emsk {

using word = std::uint64_t;
using i64 = std::int64_t;
using u64 = std::uint64_t;
using u32 = std::uint32_t;

inline constexpr u64 kWordBytes = 8;

inline u64 ceil_div(u64 a, u64 b) { return (a + b - 1) / b; }

// floor(log2(x)) for x >= 1
inline u32 floor_log2(u64 x) {
    assert(x >= 1);
    return 63u - static_cast<u32>(__builtin_clzll(x));
}

inline u32 ceil_log2(u64 x) {
    assert(x >= 1);
    u32 f = floor_log2(x);
    return (x == (u64(1) << f)) ? f : f + 1;
}

// Arithmetic in the field Z_p for the Mersenne prime p = 2^61 - 1.
// Fingerprints and the bucket hash family live here.
namespace m61 {

inline constexpr u64 P = (u64(1) << 61) - 1;

inline u64 reduce(u64 x) {
    x = (x & P) + (x >> 61);
    if (x >= P) x -= P;
    return x;
}

inline u64 add(u64 a, u64 b) {
    u64 s = a + b;
    if (s >= P) s -= P;
    return s;
}

inline u64 sub(u64 a, u64 b) { return a >= b ? a - b : a + P - b; }

inline u64 mul(u64 a, u64 b) {
    unsigned __int128 t = static_cast<unsigned __int128>(a) * b;
    u64 lo = static_cast<u64>(t & P);
    u64 hi = static_cast<u64>(t >> 61);
    u64 s = lo + hi;
    if (s >= P) s -= P;
    return s;
}

inline u64 pow(u64 base, u64 exp) {
    u64 r = 1;
    u64 b = base >= P ? base % P : base;
    while (exp) {
        if (exp & 1) r = mul(r, b);
        b = mul(b, b);
        exp >>= 1;
    }
    return r;
}

} // namespace m61

// splitmix64 finalizer; the one hash used to derive all per-copy and
// per-level randomness from (seed, tags).
inline u64 mix64(u64 x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline u64 mix64(u64 a, u64 b) { return mix64(a ^ mix64(b)); }
inline u64 mix64(u64 a, u64 b, u64 c) { return mix64(mix64(a, b) ^ mix64(c ^ 0x6a09e667f3bcc909ULL)); }

// Deterministic stream of 64-bit values; used for test corpora and for
// the seeded sampling decisions inside the densest-subgraph pipeline.
class Rng {
public:
    explicit Rng(u64 seed) : state_(seed) {}

    u64 next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_ ^ 0x9e3779b97f4a7c15ULL);
    }

    // uniform in [0, n)
    u64 next_below(u64 n) {
        assert(n > 0);
        return next() % n;
    }

    // uniform double in [0, 1)
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    u64 state_;
};

struct em_error : std::runtime_error {
    explicit em_error(const std::string& what) : std::runtime_error(what) {}
};

// an algorithm precondition failed on the given input
struct precond_error : em_error {
    explicit precond_error(const std::string& what) : em_error(what) {}
};

// sketch sampling or skeleton levels ran out of headroom
struct saturation_error : em_error {
    explicit saturation_error(const std::string& what) : em_error(what) {}
};

} // namespace emsk
