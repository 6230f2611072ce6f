#pragma once

#include <cmath>
#include <cstdint>
#include <span>

namespace covertic {

struct WilsonInterval {
    double lo = 0.0;
    double hi = 1.0;
};

/// Wilson score interval for a binomial proportion (default 95%).
inline WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials,
                                      double z = 1.959963984540054) {
    if (trials == 0) return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {center - half, center + half};
}

/// Fixed binary-tree summation. The reduction order depends only on the
/// element order, never on thread count, so parallel kernels that fill a
/// per-index buffer and reduce with this are bit-stable across worker counts.
inline double pairwise_sum(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n <= 8) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

struct MeanStdErr {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Sample mean and its standard error (two-pass, pairwise-summed).
inline MeanStdErr mean_std_error(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n == 0) return {};
    const double mean = pairwise_sum(xs) / static_cast<double>(n);
    if (n == 1) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) {
        const double d = x - mean;
        ss += d * d;
    }
    const double var = ss / static_cast<double>(n - 1);
    return {mean, std::sqrt(var / static_cast<double>(n))};
}

}  // namespace covertic
