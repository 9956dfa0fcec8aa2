#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace kcq {

inline constexpr double kPi = 3.14159265358979323846;

// Binary entropy in bits, with the 0*log(0) = 0 convention.
inline double binary_entropy(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Standard normal tail probability Q(x) = 1 - Phi(x).
inline double normal_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// log2(2^n - 1) without forming 2^n. Used by the entropy/p1 frontier.
inline double log2_pow2_minus_one(int n) {
    // log2(2^n - 1) = n + log2(1 - 2^-n)
    double t = std::exp2(-static_cast<double>(n));
    return static_cast<double>(n) + std::log1p(-t) / std::log(2.0);
}

// x * log2(x) with the limit value 0 at x = 0.
inline double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

inline bool is_power_of_two(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

inline int int_log2(std::uint64_t v) {
    int k = 0;
    while (v > 1) {
        v >>= 1;
        ++k;
    }
    return k;
}

}  // namespace kcq
