#pragma once

#include <cstdint>
#include <limits>

#include "opow/digest.hpp"

namespace opow {

// One SplitMix64 output step applied to `x` (state advanced by the golden gamma).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    std::uint64_t z = x + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256++ (Blackman & Vigna reference state update).
// Each state word is one SplitMix64 step of the corresponding seed word, so an
// all-zero seed never yields the forbidden all-zero state.
class Xoshiro256pp {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256pp(std::uint64_t seed = 0) noexcept
        : Xoshiro256pp(seed, seed + 1, seed + 2, seed + 3)
    {
    }

    Xoshiro256pp(std::uint64_t w0, std::uint64_t w1, std::uint64_t w2, std::uint64_t w3) noexcept
        : s_{splitmix64(w0), splitmix64(w1), splitmix64(w2), splitmix64(w3)}
    {
    }

    // Seeded from the four little-endian 64-bit words of a digest.
    static Xoshiro256pp from_digest(const Digest256& d) noexcept
    {
        std::uint64_t w[4];
        for (int i = 0; i < 4; ++i) {
            std::uint64_t v = 0;
            for (int b = 7; b >= 0; --b) v = (v << 8) | d.bytes[8 * i + b];
            w[i] = v;
        }
        return Xoshiro256pp(w[0], w[1], w[2], w[3]);
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept
    {
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

    // Uniform double in [0, 1) from the top 53 bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept
    {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4];
};

}  // namespace opow
