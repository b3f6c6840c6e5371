#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace rrx {

/// Theta(R) = 2^{1/(2(2R+1))} R^{-1/(2R+1)} (1+1/R)^{R/(2R+1)} ((2R)^{-2R/(2R+1)} + (2R)^{1/(2R+1)})^{1/2}.
/// Tends to 1 as R grows.
inline double theta(int R) {
    if (R < 1) throw std::out_of_range("theta: R must be >= 1");
    const double r = R;
    const double a = 2.0 * r + 1.0;
    return std::pow(2.0, 1.0 / (2.0 * a)) * std::pow(r, -1.0 / a) * std::pow(1.0 + 1.0 / r, r / a) *
           std::sqrt(std::pow(2.0 * r, -2.0 * r / a) + std::pow(2.0 * r, 1.0 / a));
}

/// Euler steps per Monte Carlo path of an R-level extrapolation with n macro steps: n R(R+1)/2.
inline double path_complexity(int R, std::int64_t n) { return static_cast<double>(n) * R * (R + 1) / 2.0; }

struct BudgetPlan {
    double budget = 0.0;
    int order = 0;
    double var_estimate = 0.0;
    double c_tilde_estimate = 0.0;
    double n_asymptotic = 0.0;
    double m_asymptotic = 0.0;
    std::int64_t n_star = 0;
    std::int64_t m_star = 0;
    double theta = 0.0;
    /// Var / (2R c~^2) n*^{2R}, the asymptotic M-n relation evaluated at the rounded n.
    double m_from_relation = 0.0;
};

/// Asymptotically optimal (n, M) for a budget of N unit Euler steps. n is floored (at least 1) and M is then
/// the largest count with M n R(R+1)/2 <= N.
inline BudgetPlan plan_budget(int R, double budget, double var_estimate, double c_tilde_estimate) {
    if (R < 1) throw std::invalid_argument("plan_budget: R must be >= 1");
    if (!(budget > 0.0) || !(var_estimate > 0.0) || !(c_tilde_estimate > 0.0))
        throw std::invalid_argument("plan_budget: budget, variance and c~ must be positive");
    const double r = R;
    const double a = 2.0 * r + 1.0;
    const double c2 = c_tilde_estimate * c_tilde_estimate;
    BudgetPlan p;
    p.budget = budget;
    p.order = R;
    p.var_estimate = var_estimate;
    p.c_tilde_estimate = c_tilde_estimate;
    p.theta = theta(R);
    p.n_asymptotic = std::pow((r + 1.0) / 4.0, -1.0 / a) * std::pow(c2 / var_estimate, 1.0 / a) * std::pow(budget, 1.0 / a);
    p.m_asymptotic = 2.0 / (r * (r + 1.0)) * std::pow((r + 1.0) / 4.0, 1.0 / a) *
                     std::pow(var_estimate / c2, 1.0 / a) * std::pow(budget, 2.0 * r / a);
    p.n_star = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(p.n_asymptotic)));
    p.m_star = static_cast<std::int64_t>(std::floor(budget / path_complexity(R, p.n_star)));
    if (p.m_star < 1) throw std::invalid_argument("plan_budget: budget below the cost of one path");
    p.m_from_relation = var_estimate / (2.0 * r * c2) * std::pow(static_cast<double>(p.n_star), 2.0 * r);
    return p;
}

}  // namespace rrx
