#pragma once

// Counter-based random streams for reproducible Monte Carlo. Every sampled
// center gets its own substream derived from (master seed, center index), so
// results do not depend on evaluation order and a single center can be
// re-drawn in isolation (useful for debugging and for the convergence
// check's half-ensemble trick). splitmix64 is used both as the generator
// and as the stream-derivation mix; it is tiny, passes standard batteries,
// and unlike the stdlib engines it is trivially seekable by construction.

#include <cstdint>

namespace nvodmr {

namespace detail {

// Finalizing mix of splitmix64 (Steele, Lea, Flood 2014).
inline constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

class RandomStream {
public:
    // Substream `index` of master seed `seed`. The initial state mixes both
    // words through the splitmix64 finalizer twice so that neighboring
    // (seed, index) pairs land far apart in state space.
    constexpr RandomStream(std::uint64_t seed, std::uint64_t index)
        : state_(detail::splitmix64_mix(
              seed + detail::splitmix64_mix(index + 0x9e3779b97f4a7c15ULL))) {}

    constexpr std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return detail::splitmix64_mix(state_);
    }

    // Uniform double strictly inside (0, 1): (k + 0.5) * 2^-53 for k in
    // [0, 2^53). Never returns an endpoint, which keeps downstream inverse
    // CDFs finite, and the value set is exactly symmetric about 1/2.
    constexpr double next_unit_open() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Uniform draw from {0, 1, ..., n-1} by rejection (no modulo bias).
    constexpr std::uint32_t next_below(std::uint32_t n) {
        const std::uint64_t limit = ~0ULL - (~0ULL % n + 1) % n;
        std::uint64_t x = next_u64();
        while (x > limit) x = next_u64();
        return static_cast<std::uint32_t>(x % n);
    }

private:
    std::uint64_t state_;
};

}  // namespace nvodmr
