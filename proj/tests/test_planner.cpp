#include <cmath>

#include <gtest/gtest.h>

#include "rrx/planner.hpp"

using namespace rrx;

// Golden values below come from a 30-digit evaluation of the closed forms.

TEST(Theta, GoldenValues) {
    EXPECT_NEAR(theta(1), 1.944161297239666, 1e-13);
    EXPECT_NEAR(theta(2), 1.409270982446784, 1e-13);
    EXPECT_NEAR(theta(3), 1.247219128924647, 1e-13);
    EXPECT_NEAR(theta(50), 1.002277428525863, 1e-13);
}

TEST(Theta, TendsToOne) { EXPECT_NEAR(theta(50), 1.0, 0.05); }

TEST(Theta, FiniteAndPositive) {
    for (int R = 1; R <= 30; ++R) {
        const double t = theta(R);
        EXPECT_TRUE(std::isfinite(t));
        EXPECT_GT(t, 0.0);
    }
    EXPECT_THROW(theta(0), std::out_of_range);
}

TEST(PlanBudget, GoldenPlan) {
    const auto p = plan_budget(2, 1e8, 1.0, 1.0);
    EXPECT_NEAR(p.n_asymptotic, 42.168460634275, 1e-9);
    EXPECT_NEAR(p.m_asymptotic, 790480.20326, 1e-4);
    EXPECT_EQ(p.n_star, 42);
    EXPECT_EQ(p.m_star, 793650);
    EXPECT_NEAR(p.theta, theta(2), 0.0);
    EXPECT_NEAR(p.m_from_relation, std::pow(42.0, 4) / 4.0, 1e-6);
}

TEST(PlanBudget, RespectsComplexityConstraint) {
    for (int R = 1; R <= 8; ++R)
        for (double N : {1e4, 3.3e6, 1e8, 7.7e9})
            for (double var : {0.1, 1.0, 400.0})
                for (double c : {0.01, 1.0, 50.0}) {
                    BudgetPlan p;
                    try {
                        p = plan_budget(R, N, var, c);
                    } catch (const std::invalid_argument&) {
                        continue;  // budget below one path
                    }
                    const double kappa = path_complexity(R, p.n_star);
                    EXPECT_GE(p.n_star, 1);
                    EXPECT_GE(p.m_star, 1);
                    EXPECT_LE(static_cast<double>(p.m_star) * kappa, N);
                    EXPECT_GT(static_cast<double>(p.m_star + 1) * kappa, N);
                }
}

TEST(PlanBudget, DoublingBudgetScalesSteps) {
    const int R = 3;
    const auto a = plan_budget(R, 1e9, 1.0, 1.0);
    const auto b = plan_budget(R, 2e9, 1.0, 1.0);
    EXPECT_NEAR(a.n_asymptotic, 19.30697728883250, 1e-10);
    EXPECT_NEAR(b.n_asymptotic, 21.31663116533842, 1e-10);
    EXPECT_NEAR(b.n_asymptotic / a.n_asymptotic, std::pow(2.0, 1.0 / 7.0), 1e-12);
    // Rounded values agree up to one step of flooring.
    EXPECT_LE(std::abs(static_cast<double>(b.n_star) - std::pow(2.0, 1.0 / 7.0) * a.n_star), 1.0 + std::pow(2.0, 1.0 / 7.0));
    EXPECT_NEAR(b.m_asymptotic / a.m_asymptotic, std::pow(2.0, 6.0 / 7.0), 1e-12);
}

TEST(PlanBudget, Errors) {
    EXPECT_THROW(plan_budget(2, 0.0, 1.0, 1.0), std::invalid_argument);
    EXPECT_THROW(plan_budget(2, 1e6, -1.0, 1.0), std::invalid_argument);
    EXPECT_THROW(plan_budget(2, 1e6, 1.0, 0.0), std::invalid_argument);
    EXPECT_THROW(plan_budget(0, 1e6, 1.0, 1.0), std::invalid_argument);
    EXPECT_THROW(plan_budget(4, 5.0, 1.0, 1.0), std::invalid_argument);
}

TEST(PathComplexity, TriangularCount) {
    EXPECT_EQ(path_complexity(1, 10), 10.0);
    EXPECT_EQ(path_complexity(3, 10), 60.0);
    EXPECT_EQ(path_complexity(4, 8), 80.0);
}
