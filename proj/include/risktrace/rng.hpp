#ifndef RISKTRACE_RNG_HPP
#define RISKTRACE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

#include "risktrace/errors.hpp"

namespace risktrace {

// splitmix64 (Vigna/Steele et al., public domain); used to whiten seeds and
// derive substream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seedable random stream with portable draw semantics.
///
/// The engine is std::mt19937_64, whose output sequence the standard pins
/// down exactly; all distributions are implemented here rather than with
/// std:: distribution adaptors, which are implementation-defined. Identical
/// seeds therefore give identical draws on every platform.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(whiten(seed)) {}

    /// Independent stream for one unit of work (trial, chain, repetition).
    /// Streams for distinct indices never share engine state.
    static RngStream substream(std::uint64_t seed, std::uint64_t index) {
        std::uint64_t s = seed;
        std::uint64_t a = splitmix64(s);
        s = a + 0x9e3779b97f4a7c15ULL * (index + 1);
        return RngStream(splitmix64(s));
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1), 53-bit resolution.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    /// Uniform integer in [lo, hi], inclusive, via rejection.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t u;
        do {
            u = next_u64();
        } while (u >= limit);
        return lo + static_cast<std::int64_t>(u % span);
    }

    bool bernoulli(double p) { return uniform01() < p; }

    /// Standard normal via Marsaglia polar; the spare deviate is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

private:
    static std::uint64_t whiten(std::uint64_t seed) {
        std::uint64_t s = seed;
        return splitmix64(s);
    }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Gamma(shape, rate) draw, Marsaglia-Tsang squeeze; shape < 1 handled by
/// the usual boost through shape + 1.
inline double sample_gamma(RngStream& rng, double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0)) {
        throw DomainError("sample_gamma: shape and rate must be positive");
    }
    if (shape < 1.0) {
        const double u = rng.uniform01();
        return sample_gamma(rng, shape + 1.0, rate) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform01();
        if (u < 1.0 - 0.0331 * x * x * x * x) {
            return d * v / rate;
        }
        if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
            return d * v / rate;
        }
    }
}

} // namespace risktrace

#endif
