#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace rrx {

using Rational = boost::multiprecision::cpp_rational;

/// Largest extrapolation order accepted by the closed-form builders.
inline constexpr int kMaxOrder = 20;

/// Family of exponents gamma_1 < ... < gamma_{R-1} of the weak error expansion
/// E f(X_bar) = E f(X) + sum_l c_l h^{gamma_l} + ..., with h the level step.
enum class ScaleKind { Integer, HalfOrder, Custom };

struct ErrorScale {
    ScaleKind kind = ScaleKind::Integer;
    std::vector<double> exponents;  // Custom only

    static ErrorScale integer() { return {ScaleKind::Integer, {}}; }
    static ErrorScale half_order() { return {ScaleKind::HalfOrder, {}}; }
    static ErrorScale custom(std::vector<double> gammas) {
        for (std::size_t i = 0; i < gammas.size(); ++i) {
            if (!(gammas[i] > 0.0) || (i > 0 && !(gammas[i] > gammas[i - 1])))
                throw std::invalid_argument("custom error scale must be strictly increasing and positive");
        }
        return {ScaleKind::Custom, std::move(gammas)};
    }

    /// Exponent gamma_l, l = 1..R-1.
    double exponent(int l) const {
        switch (kind) {
            case ScaleKind::Integer: return static_cast<double>(l);
            case ScaleKind::HalfOrder: return 0.5 * l;
            case ScaleKind::Custom: return exponents.at(static_cast<std::size_t>(l - 1));
        }
        return 0.0;
    }

    std::string name() const {
        switch (kind) {
            case ScaleKind::Integer: return "integer";
            case ScaleKind::HalfOrder: return "half";
            case ScaleKind::Custom: return "custom";
        }
        return "?";
    }
};

/// Extrapolation weights alpha_1..alpha_R together with the nodes x_r they were solved on.
struct WeightVector {
    int order = 0;
    ErrorScale scale;
    std::vector<double> weights;
    std::vector<double> nodes;

    double operator[](std::size_t r) const { return weights[r]; }
    std::size_t size() const { return weights.size(); }
};

struct ExactWeightVector {
    int order = 0;
    std::vector<Rational> weights;
    std::vector<Rational> nodes;
};

namespace detail {

inline void check_order(int R) {
    if (R < 1 || R > kMaxOrder)
        throw std::out_of_range("extrapolation order must lie in 1.." + std::to_string(kMaxOrder) + ", got " +
                                std::to_string(R));
}

template <class T>
std::vector<T> lagrange_at_zero(const std::vector<T>& nodes) {
    const std::size_t R = nodes.size();
    if (R == 0) throw std::invalid_argument("extrapolation order must be at least 1");
    for (std::size_t i = 0; i < R; ++i)
        for (std::size_t j = i + 1; j < R; ++j)
            if (nodes[i] == nodes[j]) throw std::invalid_argument("degenerate Vandermonde: duplicate nodes");
    // alpha_r = L_r(0) for the Lagrange basis on the nodes: sum_r alpha_r x_r^k = delta_{k,0}, k < R.
    std::vector<T> alpha(R);
    for (std::size_t r = 0; r < R; ++r) {
        T num = 1;
        T den = 1;
        for (std::size_t j = 0; j < R; ++j) {
            if (j == r) continue;
            num *= -nodes[j];
            den *= nodes[r] - nodes[j];
        }
        alpha[r] = num / den;
    }
    return alpha;
}

inline double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

}  // namespace detail

/// Solves sum_r alpha_r * nodes_r^{l-1} = delta_{l,1}, l = 1..R.
inline WeightVector solve_weights(const std::vector<double>& nodes, ErrorScale scale = ErrorScale::integer()) {
    WeightVector w;
    w.order = static_cast<int>(nodes.size());
    w.scale = std::move(scale);
    w.weights = detail::lagrange_at_zero(nodes);
    w.nodes = nodes;
    return w;
}

inline ExactWeightVector solve_weights_exact(const std::vector<Rational>& nodes) {
    return {static_cast<int>(nodes.size()), detail::lagrange_at_zero(nodes), nodes};
}

inline ExactWeightVector standard_weights_exact(int R) {
    detail::check_order(R);
    ExactWeightVector w;
    w.order = R;
    for (int r = 1; r <= R; ++r) {
        boost::multiprecision::cpp_int num = 1;
        for (int i = 0; i < R; ++i) num *= r;
        boost::multiprecision::cpp_int den = 1;
        for (int i = 2; i <= r; ++i) den *= i;
        for (int i = 2; i <= R - r; ++i) den *= i;
        Rational a(num, den);
        if ((R - r) % 2 != 0) a = -a;
        w.weights.push_back(a);
        w.nodes.push_back(Rational(1, r));
    }
    return w;
}

/// Closed form alpha_r = (-1)^{R-r} r^R / (r! (R-r)!), rounded once from the exact rationals.
inline WeightVector standard_weights(int R) {
    const ExactWeightVector exact = standard_weights_exact(R);
    WeightVector w;
    w.order = R;
    w.scale = ErrorScale::integer();
    for (int r = 1; r <= R; ++r) {
        w.weights.push_back(exact.weights[static_cast<std::size_t>(r - 1)].convert_to<double>());
        w.nodes.push_back(1.0 / r);
    }
    return w;
}

/// Weights for an expansion in powers of n^{-1/2}:
/// alpha_r = (-1)^{R-r}/2 * r^R/(r!(R-r)!) * prod_{k=1..R} (1 + sqrt(k/r)).
inline WeightVector half_order_weights(int R) {
    detail::check_order(R);
    WeightVector w;
    w.order = R;
    w.scale = ErrorScale::half_order();
    for (int r = 1; r <= R; ++r) {
        // Extended precision keeps the rounded weight within an ulp; |alpha| reaches 1e3 by R = 6.
        const long double sign = ((R - r) % 2 == 0) ? 1.0L : -1.0L;
        long double prod = 1.0L;
        for (int k = 1; k <= R; ++k) prod *= 1.0L + std::sqrt(static_cast<long double>(k) / r);
        const long double ratio = std::pow(static_cast<long double>(r), R) /
                                  (static_cast<long double>(detail::factorial(r)) * detail::factorial(R - r));
        w.weights.push_back(static_cast<double>(0.5L * sign * ratio * prod));
        w.nodes.push_back(1.0 / std::sqrt(static_cast<double>(r)));
    }
    return w;
}

/// sum_r alpha_r / r^R for the standard weights; the closed value is (-1)^{R-1}/R!.
/// Scales the residual bias c_R / n^R of the combined estimator.
inline double leading_coefficient_factor(int R) {
    const WeightVector w = standard_weights(R);
    double s = 0.0;
    for (int r = 1; r <= R; ++r) s += w.weights[r - 1] / std::pow(static_cast<double>(r), R);
    return s;
}

inline Rational leading_coefficient_factor_exact(int R) {
    const ExactWeightVector w = standard_weights_exact(R);
    Rational s = 0;
    for (int r = 1; r <= R; ++r) {
        Rational p = 1;
        for (int i = 0; i < R; ++i) p *= w.nodes[r - 1];
        s += w.weights[r - 1] * p;
    }
    return s;
}

inline double sum_of_squares(const WeightVector& w) {
    double s = 0.0;
    for (double a : w.weights) s += a * a;
    return s;
}

inline Rational sum_of_squares(const ExactWeightVector& w) {
    Rational s = 0;
    for (const Rational& a : w.weights) s += a * a;
    return s;
}

/// Weights for any scale. Custom exponents use node x_r = 1/r and equation l on x_r^{gamma_l};
/// they are not equally spaced powers, so this branch does a dense solve.
inline WeightVector weights_for_scale(int R, const ErrorScale& scale) {
    detail::check_order(R);
    switch (scale.kind) {
        case ScaleKind::Integer: return standard_weights(R);
        case ScaleKind::HalfOrder: return half_order_weights(R);
        case ScaleKind::Custom: break;
    }
    if (static_cast<int>(scale.exponents.size()) < R - 1)
        throw std::invalid_argument("custom scale needs R-1 exponents");
    // Row 0: sum alpha = 1; row l: sum alpha_r r^{-gamma_l} = 0. Gaussian elimination with partial pivoting.
    const auto n = static_cast<std::size_t>(R);
    std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
    for (std::size_t c = 0; c < n; ++c) a[0][c] = 1.0;
    a[0][n] = 1.0;
    for (std::size_t l = 1; l < n; ++l)
        for (std::size_t c = 0; c < n; ++c)
            a[l][c] = std::pow(static_cast<double>(c + 1), -scale.exponents[l - 1]);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t i = col + 1; i < n; ++i)
            if (std::abs(a[i][col]) > std::abs(a[piv][col])) piv = i;
        if (a[piv][col] == 0.0) throw std::invalid_argument("degenerate Vandermonde: singular custom scale");
        std::swap(a[piv], a[col]);
        for (std::size_t i = 0; i < n; ++i) {
            if (i == col) continue;
            const double f = a[i][col] / a[col][col];
            for (std::size_t j = col; j <= n; ++j) a[i][j] -= f * a[col][j];
        }
    }
    WeightVector w;
    w.order = R;
    w.scale = scale;
    for (std::size_t r = 0; r < n; ++r) {
        w.weights.push_back(a[r][n] / a[r][r]);
        w.nodes.push_back(1.0 / static_cast<double>(r + 1));
    }
    return w;
}

}  // namespace rrx
