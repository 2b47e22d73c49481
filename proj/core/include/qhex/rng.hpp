#ifndef QHEX_RNG_HPP
#define QHEX_RNG_HPP

#include <cmath>
#include <cstdint>

namespace qhex {

// splitmix64 finalizer; also used as the counter-based hash for noise streams.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Small deterministic generator with a pinned output sequence (splitmix64
// stream). std::shuffle / std::*_distribution are implementation-defined,
// so all randomized outputs that must reproduce byte-for-byte go through this.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0,1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform in (0,1); never exactly 0, safe under log()
    double next_open_double() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // uniform integer in [0, bound) by rejection
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % bound;
    }

    // standard normal via Box-Muller (consumes two draws)
    double next_normal() {
        const double u1 = next_open_double();
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    std::uint64_t state_;
};

// Two independent normals from a counter-based stream: deterministic per
// (seed, counter) regardless of evaluation order.
inline void counter_normals(std::uint64_t seed, std::uint64_t counter, double& n1, double& n2) {
    const std::uint64_t a = mix64(mix64(seed) ^ (2 * counter));
    const std::uint64_t b = mix64(mix64(seed) ^ (2 * counter + 1));
    const double u1 = (static_cast<double>(a >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    n1 = r * std::cos(6.283185307179586476925286766559 * u2);
    n2 = r * std::sin(6.283185307179586476925286766559 * u2);
}

} // namespace qhex

#endif
