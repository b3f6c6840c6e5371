#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "rrx/model.hpp"
#include "rrx/scheme.hpp"

using namespace rrx;

namespace {

const BlackScholesModel kReferenceBs(100.0, 0.15, 1.0);

SimulationPlan make_plan(int R, int n, Coupling coupling, bool bridged, const IncrementSchedule* s) {
    SimulationPlan p;
    p.order = R;
    p.steps = n;
    p.horizon = 1.0;
    p.coupling = coupling;
    p.bridged = bridged;
    p.schedule = s;
    return p;
}

double mean_square_gap(Coupling coupling, int n, int paths) {
    const auto s = build_schedule(2, ScheduleKind::Sparing);
    const auto plan = make_plan(2, n, coupling, false, &s);
    SchemeWorkspace<BlackScholesModel> ws(kReferenceBs);
    CoupledPathBundle b;
    double acc = 0.0;
    for (int p = 0; p < paths; ++p) {
        RandomSource rng(404, static_cast<std::uint64_t>(p));
        simulate_coupled(kReferenceBs, plan, rng, b, ws);
        const double d = b.terminal(1)[0] - b.terminal(2)[0];
        acc += d * d;
    }
    return acc / paths;
}

}  // namespace

TEST(EulerStep, BlackScholesZeroNoise) {
    const std::vector<double> x = {100.0}, dW = {0.0};
    EXPECT_NEAR(euler_step(kReferenceBs, 0.0, x, 0.1, dW)[0], 101.5, 1e-12);
}

TEST(EulerStep, BlackScholesWithNoise) {
    const std::vector<double> x = {100.0}, dW = {0.3};
    EXPECT_NEAR(euler_step(kReferenceBs, 0.0, x, 0.5, dW)[0], 137.5, 1e-12);
}

TEST(EulerStep, ZeroDiffusionIsExplicitEuler) {
    const auto m = make_scalar_model(2.0, [](double t, double x) { return -x + t; }, [](double, double) { return 0.0; });
    const std::vector<double> x = {2.0}, dW = {12.3};
    EXPECT_NEAR(euler_step(m, 0.5, x, 0.25, dW)[0], 2.0 + (-2.0 + 0.5) * 0.25, 1e-15);
}

TEST(EulerStep, BlowUpCarriesTimeAndState) {
    const auto m = make_scalar_model(1.0, [](double, double x) { return x * 1e308; }, [](double, double) { return 0.0; });
    const std::vector<double> x = {10.0}, dW = {0.0};
    try {
        euler_step(m, 0.75, x, 1.0, dW);
        FAIL() << "expected blow-up";
    } catch (const NumericalBlowUp& e) {
        EXPECT_EQ(e.time(), 0.75);
        EXPECT_EQ(e.state(), x);
        EXPECT_NE(std::string(e.what()).find("numerical blow-up"), std::string::npos);
    }
    EXPECT_THROW(euler_step(kReferenceBs, 0.0, x, 0.0, dW), std::invalid_argument);
}

TEST(Bridge, UnitUniformGivesEndpointExtrema) {
    EXPECT_DOUBLE_EQ(bridge_max_sample(3.0, 5.0, 2.0, 0.1, 1.0), 5.0);
    EXPECT_DOUBLE_EQ(bridge_min_sample(3.0, 5.0, 2.0, 0.1, 1.0), 3.0);
    EXPECT_DOUBLE_EQ(bridge_max_sample(5.0, 3.0, 2.0, 0.1, 1.0), 5.0);
}

TEST(Bridge, DirectFormulaValues) {
    const double u = std::exp(-1.0);
    EXPECT_NEAR(bridge_max_sample(100.0, 100.0, 100.0, 0.1, u), 100.0 + 0.5 * std::sqrt(2000.0), 1e-12);
    EXPECT_NEAR(bridge_max_sample(100.0, 100.0, 100.0, 0.1, u), 122.36, 0.005);
    EXPECT_NEAR(bridge_min_sample(100.0, 100.0, 100.0, 0.1, u), 77.64, 0.005);
}

TEST(Bridge, ReflectionSymmetryAndErrors) {
    for (double u : {0.01, 0.3, 0.77, 1.0})
        EXPECT_DOUBLE_EQ(bridge_min_sample(1.0, -2.0, 0.4, 0.2, u), -bridge_max_sample(-1.0, 2.0, 0.4, 0.2, u));
    EXPECT_THROW(bridge_max_sample(0, 0, 1, 0.1, 0.0), std::domain_error);
    EXPECT_THROW(bridge_min_sample(0, 0, 1, 0.1, 0.0), std::domain_error);
    EXPECT_THROW(bridge_max_sample(0, 0, 1, 0.0, 0.5), std::invalid_argument);
}

// Kolmogorov-Smirnov against P(max <= m) = 1 - exp(-2 (m - x)(m - y) / (sigma^2 dt)), 1% level.
TEST(Bridge, MaximumLawKolmogorovSmirnov) {
    constexpr int kN = 1000000;
    const double x = 1.0, y = 1.3, sigma = 0.8, dt = 0.25;
    RandomSource rng(8, 0);
    std::vector<double> samples(kN);
    for (double& s : samples) s = bridge_max_sample(x, y, sigma, dt, rng.uniform_open_zero());
    std::sort(samples.begin(), samples.end());
    double ks = 0.0;
    for (int i = 0; i < kN; ++i) {
        const double m = samples[static_cast<std::size_t>(i)];
        const double cdf = 1.0 - std::exp(-2.0 * (m - x) * (m - y) / (sigma * sigma * dt));
        ks = std::max({ks, std::abs(cdf - static_cast<double>(i) / kN), std::abs(cdf - static_cast<double>(i + 1) / kN)});
    }
    EXPECT_LT(ks, 1.628 / std::sqrt(static_cast<double>(kN)));
}

// Pinned bridge: E max = sigma sqrt(dt) sqrt(pi/8).
TEST(Bridge, PinnedBridgeMeanMaximum) {
    constexpr int kN = 400000;
    const double sigma = 1.7, dt = 0.3;
    RandomSource rng(9, 0);
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < kN; ++i) {
        const double m = bridge_max_sample(0.0, 0.0, sigma, dt, rng.uniform_open_zero());
        s += m;
        s2 += m * m;
    }
    const double mean = s / kN;
    const double se = std::sqrt((s2 / kN - mean * mean) / kN);
    EXPECT_NEAR(mean, sigma * std::sqrt(dt) * std::sqrt(std::numbers::pi / 8.0), 3.0 * se);
}

TEST(SimulateCoupled, GridShapes) {
    const auto s = build_schedule(4, ScheduleKind::Sparing);
    RandomSource rng(1, 0);
    const auto b = simulate_coupled(kReferenceBs, make_plan(4, 5, Coupling::Consistent, false, &s), rng);
    ASSERT_EQ(b.levels.size(), 4u);
    for (int r = 1; r <= 4; ++r) {
        EXPECT_EQ(b.state_count(r), static_cast<std::size_t>(5 * r + 1));
        EXPECT_EQ(b.state(r, 0)[0], 100.0);
    }
}

TEST(SimulateCoupled, SingleLevelIsPlainEuler) {
    const auto s = build_schedule(1, ScheduleKind::Sparing);
    RandomSource rng(17, 3), twin(17, 3);
    const auto b = simulate_coupled(kReferenceBs, make_plan(1, 12, Coupling::Consistent, false, &s), rng);
    double x = 100.0;
    const double dt = 1.0 / 12;
    for (int k = 0; k < 12; ++k) {
        const double dW = std::sqrt(dt) * twin.normal();
        x = x + 0.15 * x * dt + 1.0 * x * dW;
        ASSERT_EQ(b.state(1, static_cast<std::size_t>(k + 1))[0], x);
    }
}

// With b = 0 and sigma = 1 the Euler states are the Brownian path, so levels agree wherever grids meet.
TEST(SimulateCoupled, SharedGridPointsSeeTheSameBrownianValue) {
    const auto bm = make_scalar_model(0.0, [](double, double) { return 0.0; }, [](double, double) { return 1.0; });
    for (int R = 2; R <= 6; ++R) {
        const auto s = build_schedule(R, ScheduleKind::Sparing);
        RandomSource rng(5, static_cast<std::uint64_t>(R));
        const auto b = simulate_coupled(bm, make_plan(R, 3, Coupling::Consistent, false, &s), rng);
        const int n = 3;
        for (int r = 1; r <= R; ++r)
            for (int rp = r + 1; rp <= R; ++rp)
                for (int k = 0; k <= r * n; ++k) {
                    // time k/(rn) equals j/(rp n) when k * rp is divisible by r
                    if ((k * rp) % r != 0) continue;
                    const int j = k * rp / r;
                    ASSERT_NEAR(b.state(r, static_cast<std::size_t>(k))[0], b.state(rp, static_cast<std::size_t>(j))[0], 1e-12);
                }
    }
}

TEST(SimulateCoupled, ZeroDiffusionIsDeterministicAcrossCouplings) {
    const BlackScholesModel flat(100.0, 0.15, 0.0);
    const auto s = build_schedule(3, ScheduleKind::Sparing);
    RandomSource a(1, 0), b(2, 5);
    const auto x = simulate_coupled(flat, make_plan(3, 4, Coupling::Consistent, true, &s), a);
    const auto y = simulate_coupled(flat, make_plan(3, 4, Coupling::Independent, true, &s), b);
    for (int r = 1; r <= 3; ++r) {
        EXPECT_EQ(x.levels[static_cast<std::size_t>(r - 1)].states, y.levels[static_cast<std::size_t>(r - 1)].states);
        EXPECT_NEAR(x.terminal(r)[0], 100.0 * std::pow(1.0 + 0.15 / (4 * r), 4 * r), 1e-10);
        EXPECT_DOUBLE_EQ(x.levels[static_cast<std::size_t>(r - 1)].bridged_max, x.grid_max(r));
        EXPECT_DOUBLE_EQ(x.levels[static_cast<std::size_t>(r - 1)].bridged_min, x.grid_min(r));
    }
}

TEST(SimulateCoupled, BridgedExtremaDominateGridExtrema) {
    const auto s = build_schedule(3, ScheduleKind::Sparing);
    const auto plan = make_plan(3, 6, Coupling::Consistent, true, &s);
    SchemeWorkspace<BlackScholesModel> ws(kReferenceBs);
    CoupledPathBundle b;
    for (std::uint64_t p = 0; p < 5000; ++p) {
        RandomSource rng(21, p);
        simulate_coupled(kReferenceBs, plan, rng, b, ws);
        for (int r = 1; r <= 3; ++r) {
            ASSERT_GE(b.levels[static_cast<std::size_t>(r - 1)].bridged_max, b.grid_max(r));
            ASSERT_LE(b.levels[static_cast<std::size_t>(r - 1)].bridged_min, b.grid_min(r));
        }
    }
}

TEST(SimulateCoupled, BridgingDoesNotPerturbTheSkeleton) {
    const auto s = build_schedule(3, ScheduleKind::Sparing);
    RandomSource a(3, 3), b(3, 3);
    const auto x = simulate_coupled(kReferenceBs, make_plan(3, 5, Coupling::Consistent, false, &s), a);
    const auto y = simulate_coupled(kReferenceBs, make_plan(3, 5, Coupling::Consistent, true, &s), b);
    for (int r = 1; r <= 3; ++r)
        EXPECT_EQ(x.levels[static_cast<std::size_t>(r - 1)].states, y.levels[static_cast<std::size_t>(r - 1)].states);
}

TEST(SimulateCoupled, TimeDependentDiffusionUsesLeftEndpoint) {
    const auto m = make_scalar_model(0.0, [](double, double) { return 0.0; }, [](double t, double) { return t; });
    const auto s = build_schedule(1, ScheduleKind::Sparing);
    RandomSource rng(4, 4), twin(4, 4);
    const auto b = simulate_coupled(m, make_plan(1, 4, Coupling::Consistent, false, &s), rng);
    double x = 0.0;
    for (int k = 0; k < 4; ++k) {
        x += (k * 0.25) * std::sqrt(0.25) * twin.normal();
        EXPECT_NEAR(b.state(1, static_cast<std::size_t>(k + 1))[0], x, 1e-15);
    }
    EXPECT_EQ(b.state(1, 1)[0], 0.0);
}

TEST(SimulateCoupled, RejectsBadPlans) {
    const auto s = build_schedule(2, ScheduleKind::Sparing);
    RandomSource rng(1, 1);
    EXPECT_THROW(simulate_coupled(kReferenceBs, make_plan(3, 2, Coupling::Consistent, false, &s), rng), std::invalid_argument);
    EXPECT_THROW(simulate_coupled(kReferenceBs, make_plan(2, 0, Coupling::Consistent, false, &s), rng), std::invalid_argument);
    EXPECT_NO_THROW(simulate_coupled(kReferenceBs, make_plan(3, 2, Coupling::Independent, false, nullptr), rng));
}

TEST(SimulateCoupled, PropagatesBlowUp) {
    const auto m = make_scalar_model(1.0, [](double, double x) { return 1e300 * x; }, [](double, double) { return 0.0; });
    const auto s = build_schedule(2, ScheduleKind::Sparing);
    RandomSource rng(1, 1);
    EXPECT_THROW(simulate_coupled(m, make_plan(2, 50, Coupling::Consistent, false, &s), rng), NumericalBlowUp);
}

TEST(SimulateCoupled, Deterministic) {
    const auto s = build_schedule(3, ScheduleKind::Sparing);
    RandomSource a(9, 9), b(9, 9);
    const auto x = simulate_coupled(kReferenceBs, make_plan(3, 7, Coupling::Consistent, true, &s), a);
    const auto y = simulate_coupled(kReferenceBs, make_plan(3, 7, Coupling::Consistent, true, &s), b);
    for (int r = 1; r <= 3; ++r) {
        const auto& lx = x.levels[static_cast<std::size_t>(r - 1)];
        const auto& ly = y.levels[static_cast<std::size_t>(r - 1)];
        EXPECT_EQ(lx.states, ly.states);
        EXPECT_EQ(lx.bridged_max, ly.bridged_max);
        EXPECT_EQ(lx.bridged_min, ly.bridged_min);
    }
}

// Consistent levels converge to each other strongly; independent levels never do.
TEST(SimulateCoupled, StrongGapTrend) {
    constexpr int kPaths = 20000;
    std::vector<double> cons, indep;
    for (int n : {2, 4, 8, 16}) {
        cons.push_back(mean_square_gap(Coupling::Consistent, n, kPaths));
        indep.push_back(mean_square_gap(Coupling::Independent, n, kPaths));
    }
    for (std::size_t i = 1; i < cons.size(); ++i) EXPECT_LT(cons[i], cons[i - 1]);
    EXPECT_LT(cons.back(), 0.25 * cons.front());
    EXPECT_GT(indep.back(), 0.5 * indep.front());
    EXPECT_GT(indep.back(), 20.0 * cons.back());
}

// e^{-rT} E X_T = X0 holds exactly for the Euler scheme of the Black-Scholes model.
TEST(SimulateCoupled, BlackScholesMartingale) {
    constexpr int kPaths = 100000;
    const auto s = build_schedule(1, ScheduleKind::Sparing);
    const auto plan = make_plan(1, 10, Coupling::Consistent, false, &s);
    SchemeWorkspace<BlackScholesModel> ws(kReferenceBs);
    CoupledPathBundle b;
    double sum = 0.0, sum2 = 0.0;
    for (int p = 0; p < kPaths; ++p) {
        RandomSource rng(55, static_cast<std::uint64_t>(p));
        simulate_coupled(kReferenceBs, plan, rng, b, ws);
        const double v = b.terminal(1)[0];
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / kPaths;
    const double se = std::sqrt((sum2 / kPaths - mean * mean) / kPaths);
    // Euler drift compounds as (1 + r/n)^n rather than e^r.
    const double expected = 100.0 * std::pow(1.0 + 0.15 / 10, 10);
    EXPECT_NEAR(mean, expected, 3.0 * se);
    EXPECT_NEAR(std::exp(-0.15) * mean, 100.0, 3.0 * std::exp(-0.15) * se);
}
