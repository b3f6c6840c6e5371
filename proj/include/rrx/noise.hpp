#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "rrx/random.hpp"
#include "rrx/weights.hpp"

namespace rrx {

using Fraction = boost::rational<std::int64_t>;

inline std::int64_t euler_totient(std::int64_t r) {
    std::int64_t result = r;
    for (std::int64_t p = 2; p * p <= r; ++p) {
        if (r % p == 0) {
            while (r % p == 0) r /= p;
            result -= result / p;
        }
    }
    if (r > 1) result -= result / r;
    return result;
}

/// card S_R = sum_{r<=R} phi(r): breakpoints of the sparing schedule.
inline std::int64_t totient_cardinality(int R) {
    if (R < 1) throw std::out_of_range("order must be >= 1");
    std::int64_t s = 0;
    for (int r = 1; r <= R; ++r) s += euler_totient(r);
    return s;
}

/// lcm(1..R): atoms of the lazy schedule.
inline std::int64_t lcm_atoms(int R) {
    if (R < 1) throw std::out_of_range("order must be >= 1");
    std::int64_t m = 1;
    for (int r = 2; r <= R; ++r) m = std::lcm(m, static_cast<std::int64_t>(r));
    return m;
}

enum class ScheduleKind { Lazy, Sparing };

/// Universal per-macro-step plan. Times are fractions of one macro step T/n.
/// Atom i covers [breakpoints[i-1], breakpoints[i]] with breakpoints[-1] = 0.
struct IncrementSchedule {
    struct Span {
        std::size_t begin;
        std::size_t end;
    };

    int order = 0;
    ScheduleKind kind = ScheduleKind::Sparing;
    std::vector<Fraction> breakpoints;
    std::vector<Fraction> subinterval_lengths;
    std::vector<double> atom_scale;               // sqrt(length)
    std::vector<std::vector<Span>> level_maps;    // level_maps[r-1][k-1]

    std::size_t atom_count() const { return subinterval_lengths.size(); }
};

inline IncrementSchedule build_schedule(int R, ScheduleKind kind) {
    detail::check_order(R);
    IncrementSchedule s;
    s.order = R;
    s.kind = kind;
    if (kind == ScheduleKind::Lazy) {
        const std::int64_t m = lcm_atoms(R);
        for (std::int64_t i = 1; i <= m; ++i) s.breakpoints.emplace_back(i, m);
    } else {
        for (int r = 1; r <= R; ++r)
            for (int l = 1; l <= r; ++l)
                if (std::gcd(l, r) == 1) s.breakpoints.emplace_back(l, r);
        std::sort(s.breakpoints.begin(), s.breakpoints.end());
    }
    Fraction prev(0);
    for (const Fraction& b : s.breakpoints) {
        s.subinterval_lengths.push_back(b - prev);
        s.atom_scale.push_back(std::sqrt(boost::rational_cast<double>(b - prev)));
        prev = b;
    }
    s.level_maps.resize(static_cast<std::size_t>(R));
    for (int r = 1; r <= R; ++r) {
        std::size_t begin = 0;
        for (int k = 1; k <= r; ++k) {
            const Fraction right(k, r);
            const auto it = std::lower_bound(s.breakpoints.begin(), s.breakpoints.end(), right);
            if (it == s.breakpoints.end() || *it != right)
                throw std::logic_error("schedule misses a level grid point");
            const auto end = static_cast<std::size_t>(it - s.breakpoints.begin()) + 1;
            s.level_maps[static_cast<std::size_t>(r - 1)].push_back({begin, end});
            begin = end;
        }
    }
    return s;
}

/// Normalised increments U^(r)_k, k = 1..r, of every level inside one macro step, each a q-vector.
/// Level r occupies q*r consecutive values starting at q*r(r-1)/2.
class IncrementBlock {
public:
    IncrementBlock() = default;
    IncrementBlock(int order, std::size_t q) { reset(order, q); }

    void reset(int order, std::size_t q) {
        order_ = order;
        q_ = q;
        values_.assign(q * static_cast<std::size_t>(order) * static_cast<std::size_t>(order + 1) / 2, 0.0);
    }

    int order() const { return order_; }
    std::size_t dimension() const { return q_; }

    std::span<double> level(int r) { return {values_.data() + offset(r), q_ * static_cast<std::size_t>(r)}; }
    std::span<const double> level(int r) const {
        return {values_.data() + offset(r), q_ * static_cast<std::size_t>(r)};
    }
    std::span<const double> increment(int r, int k) const { return level(r).subspan(q_ * (k - 1), q_); }
    std::span<const double> values() const { return values_; }

private:
    std::size_t offset(int r) const { return q_ * static_cast<std::size_t>(r) * static_cast<std::size_t>(r - 1) / 2; }

    int order_ = 0;
    std::size_t q_ = 1;
    std::vector<double> values_;
};

/// One consistent block: atoms xi_i ~ N(0, I_q), U^(r)_k = sqrt(r) * sum_{i in span} sqrt(len_i) xi_i.
/// `atoms` is scratch of size q * atom_count().
inline void sample_block(const IncrementSchedule& schedule, RandomSource& rng, std::size_t q, IncrementBlock& out,
                         std::vector<double>& atoms) {
    if (out.order() != schedule.order || out.dimension() != q) out.reset(schedule.order, q);
    atoms.resize(q * schedule.atom_count());
    for (std::size_t i = 0; i < schedule.atom_count(); ++i)
        for (std::size_t j = 0; j < q; ++j) atoms[i * q + j] = schedule.atom_scale[i] * rng.normal();
    for (int r = 1; r <= schedule.order; ++r) {
        const double root_r = std::sqrt(static_cast<double>(r));
        auto lvl = out.level(r);
        const auto& spans = schedule.level_maps[static_cast<std::size_t>(r - 1)];
        for (std::size_t k = 0; k < spans.size(); ++k) {
            for (std::size_t j = 0; j < q; ++j) {
                double acc = 0.0;
                for (std::size_t i = spans[k].begin; i < spans[k].end; ++i) acc += atoms[i * q + j];
                lvl[k * q + j] = root_r * acc;
            }
        }
    }
}

inline IncrementBlock sample_block(const IncrementSchedule& schedule, RandomSource& rng, std::size_t q = 1) {
    IncrementBlock out(schedule.order, q);
    std::vector<double> atoms;
    sample_block(schedule, rng, q, out, atoms);
    return out;
}

/// Comparison mode: every level draws its own fresh N(0, I_q) increments, no cross-level coupling.
inline void sample_independent_block(int R, RandomSource& rng, std::size_t q, IncrementBlock& out) {
    if (out.order() != R || out.dimension() != q) out.reset(R, q);
    for (int r = 1; r <= R; ++r) rng.fill_normal(out.level(r));
}

inline IncrementBlock sample_independent_block(int R, RandomSource& rng, std::size_t q = 1) {
    IncrementBlock out(R, q);
    sample_independent_block(R, rng, q, out);
    return out;
}

/// Cov(U^(r)_k, U^(r')_j) = sqrt(r r') * |[(k-1)/r, k/r] ∩ [(j-1)/r', j/r']| for consistent increments.
inline double overlap_covariance(int r, int k, int rp, int j) {
    const Fraction lo = std::max(Fraction(k - 1, r), Fraction(j - 1, rp));
    const Fraction hi = std::min(Fraction(k, r), Fraction(j, rp));
    if (hi <= lo) return 0.0;
    return std::sqrt(static_cast<double>(r) * rp) * boost::rational_cast<double>(hi - lo);
}

}  // namespace rrx
