#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

#include "pluridyn/common.hpp"

namespace pluridyn {

// Deterministic, platform-independent RNG streams. A stream is addressed by
// (seed, stream_id); two streams with different ids are independent, which is
// what makes per-walk / per-block Monte Carlo reproducible regardless of the
// thread schedule. xoshiro256++ seeded through splitmix64.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id = 0) {
        std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ull * (stream_id + 1));
        for (auto& si : s_) si = splitmix(x);
        // avoid the all-zero state
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
    }

    std::uint64_t next_u64() {
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

    // uniform in [0,1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform in (-1,1)
    double next_signed() { return 2.0 * next_double() - 1.0; }

    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

    // standard complex Gaussian (variance 1 per real component), Box-Muller
    cplx next_gaussian() {
        double u1 = next_double(), u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        return {r * std::cos(a), r * std::sin(a)};
    }

    cplx next_unit_complex() {
        const double a = 2.0 * M_PI * next_double();
        return {std::cos(a), std::sin(a)};
    }

private:
    static std::uint64_t splitmix(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4];
};

} // namespace pluridyn
