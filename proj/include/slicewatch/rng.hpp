#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace slicewatch {

// splitmix64 finalizer; used to derive well-separated seeds from (base, tags).
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag0, std::uint64_t tag1 = 0,
                                    std::uint64_t tag2 = 0) {
    std::uint64_t s = mix64(base);
    s = mix64(s ^ tag0);
    s = mix64(s ^ tag1);
    s = mix64(s ^ tag2);
    return s;
}

// Deterministic RNG with explicit distribution code. The std:: distributions
// are implementation-defined, so sampling is spelled out here to keep streams
// identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(mix64(seed)) {}

    std::uint64_t next() { return gen_(); }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [lo, hi], inclusive.
    long uniform_int(long lo, long hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % span;
        std::uint64_t v;
        do {
            v = gen_();
        } while (v >= limit);
        return lo + static_cast<long>(v % span);
    }

    // Standard normal via Box-Muller (cosine branch only).
    double normal() {
        double u1;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Geometric on {1, 2, ...} with the given mean (>= 1).
    long geometric(double mean) {
        if (mean <= 1.0) return 1;
        const double p = 1.0 / mean;
        double u;
        do {
            u = uniform();
        } while (u <= 0.0);
        return 1 + static_cast<long>(std::floor(std::log(u) / std::log1p(-p)));
    }

private:
    std::mt19937_64 gen_;
};

// Counter-based draws: pure functions of a key, for generators that must be
// evaluable at any time step without sequential state.
inline double counter_uniform(std::uint64_t key) {
    return static_cast<double>(mix64(key) >> 11) * 0x1.0p-53;
}

inline double counter_normal(std::uint64_t key) {
    double u1 = counter_uniform(key ^ 0x243f6a8885a308d3ULL);
    const double u2 = counter_uniform(key ^ 0x13198a2e03707344ULL);
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace slicewatch
