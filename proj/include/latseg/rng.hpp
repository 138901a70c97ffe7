#pragma once

#include <cmath>
#include <cstdint>

namespace latseg {

/// xoshiro256++ (Blackman & Vigna). Seedable, jumpable, fixed output
/// sequences across platforms. All sampling helpers below use explicit
/// algorithms so trajectories are reproducible byte for byte.
class Xoshiro256pp {
public:
    explicit Xoshiro256pp(std::uint64_t seed = 0) { reseed(seed); }

    void reseed(std::uint64_t seed) {
        std::uint64_t z = seed;
        for (auto& w : s_) w = splitmix64(z);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Advance 2^128 steps. Non-overlapping streams for up to 2^128 callers.
    void jump() {
        static const std::uint64_t tbl[] = {0x180ec6d33cfd0abaULL, 0xd5a61266f0c9392cULL,
                                            0xa9582618e03fc9aaULL, 0x39abdc4529b1661cULL};
        std::uint64_t s0 = 0, s1 = 0, s2 = 0, s3 = 0;
        for (std::uint64_t jv : tbl)
            for (int b = 0; b < 64; ++b) {
                if (jv & (1ULL << b)) {
                    s0 ^= s_[0];
                    s1 ^= s_[1];
                    s2 ^= s_[2];
                    s3 ^= s_[3];
                }
                next();
            }
        s_[0] = s0;
        s_[1] = s1;
        s_[2] = s2;
        s_[3] = s3;
    }

    /// Uniform double in [0,1) with 53 random bits.
    double uniform01() { return (next() >> 11) * 0x1.0p-53; }

    /// Exponential holding time with the given total rate.
    double exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

    bool bernoulli(double p) { return uniform01() < p; }

    /// Uniform index in [0, n).
    long uniform_index(long n) {
        long k = static_cast<long>(uniform01() * static_cast<double>(n));
        return k < n ? k : n - 1;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    static std::uint64_t splitmix64(std::uint64_t& z) {
        z += 0x9e3779b97f4a7c15ULL;
        std::uint64_t r = z;
        r = (r ^ (r >> 30)) * 0xbf58476d1ce4e5b9ULL;
        r = (r ^ (r >> 27)) * 0x94d049bb133111ebULL;
        return r ^ (r >> 31);
    }

    std::uint64_t s_[4];
};

/// Stream for replica r derived from (seed, r): distinct splitmix chains.
inline Xoshiro256pp replica_stream(std::uint64_t seed, std::uint64_t replica) {
    return Xoshiro256pp(seed ^ (0x9e3779b97f4a7c15ULL * (replica + 1)));
}

} // namespace latseg
