#pragma once

#include <cmath>
#include <cstdint>

namespace rrx {

/// Welford accumulator with Chan et al. pairwise merge.
struct RunningStats {
    std::uint64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++count;
        const double delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
    }

    void merge(const RunningStats& other) {
        if (other.count == 0) return;
        if (count == 0) {
            *this = other;
            return;
        }
        const double na = static_cast<double>(count);
        const double nb = static_cast<double>(other.count);
        const double total = na + nb;
        const double delta = other.mean - mean;
        mean += delta * nb / total;
        m2 += other.m2 + delta * delta * na * nb / total;
        count += other.count;
    }

    /// Unbiased sample variance.
    double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
    double std_error() const { return count > 0 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0; }
};

}  // namespace rrx
