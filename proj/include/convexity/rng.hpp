#pragma once

#include <cmath>
#include <cstdint>

namespace cvx::rng {

// Counter-based random stream. Every draw is a pure function of
// (seed, stream, counter), so parallel and serial consumers that agree on
// the counter assignment produce identical values regardless of execution
// order. Mixing is SplitMix64.

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

inline std::uint64_t splitmix(std::uint64_t z) {
    z += kGolden;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t stream_id)
        : key_(splitmix(splitmix(seed) ^ (stream_id * kGolden + 1))) {}

    std::uint64_t bits(std::uint64_t counter) const { return splitmix(key_ ^ (counter * kGolden)); }

    /// Uniform in the open interval (0, 1).
    double uniform(std::uint64_t counter) const {
        // 53 mantissa bits, then shift off zero.
        const std::uint64_t b = bits(counter) >> 11;
        return (static_cast<double>(b) + 0.5) * (1.0 / 9007199254740992.0);
    }

    /// Standard normal via Box-Muller on the counter pair (2k, 2k+1).
    double normal(std::uint64_t counter) const {
        const double u1 = uniform(2 * counter);
        const double u2 = uniform(2 * counter + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t counter, std::uint64_t n) const {
        return static_cast<std::uint64_t>(uniform(counter) * static_cast<double>(n)) % n;
    }

private:
    std::uint64_t key_;
};

}  // namespace cvx::rng
