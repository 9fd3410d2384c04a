#ifndef RISKTRACE_STATS_HPP
#define RISKTRACE_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "risktrace/errors.hpp"

namespace risktrace {

inline double mean(std::span<const double> xs) {
    if (xs.empty()) throw DomainError("mean: empty input");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

/// Sample standard deviation (n - 1 denominator).
inline double sample_sd(std::span<const double> xs) {
    if (xs.size() < 2) throw DomainError("sample_sd: need at least two values");
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

/// Quantile with linear interpolation between order statistics
/// (the common "type 7" rule); q in [0, 1].
inline double quantile(std::span<const double> xs, double q) {
    if (xs.empty()) throw DomainError("quantile: empty input");
    if (!(q >= 0.0 && q <= 1.0)) throw DomainError("quantile: q outside [0,1]");
    std::vector<double> v(xs.begin(), xs.end());
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= v.size()) return v.back();
    const double frac = pos - static_cast<double>(lo);
    return v[lo] + frac * (v[lo + 1] - v[lo]);
}

/// Monte Carlo standard error of the mean of a (possibly autocorrelated)
/// chain, estimated by non-overlapping batch means with ~sqrt(n) batches.
inline double mcse_batch_means(std::span<const double> chain) {
    const std::size_t n = chain.size();
    if (n < 16) throw DomainError("mcse_batch_means: chain too short");
    const std::size_t n_batches =
        std::max<std::size_t>(8, static_cast<std::size_t>(std::sqrt(static_cast<double>(n))));
    const std::size_t batch_len = n / n_batches;
    std::vector<double> batch_means;
    batch_means.reserve(n_batches);
    for (std::size_t b = 0; b < n_batches; ++b) {
        double s = 0.0;
        for (std::size_t i = b * batch_len; i < (b + 1) * batch_len; ++i) s += chain[i];
        batch_means.push_back(s / static_cast<double>(batch_len));
    }
    return sample_sd(batch_means) / std::sqrt(static_cast<double>(n_batches));
}

} // namespace risktrace

#endif
