#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "rrx/model.hpp"
#include "rrx/noise.hpp"
#include "rrx/random.hpp"

namespace rrx {

enum class Coupling { Consistent, Independent };

inline const char* to_string(Coupling c) { return c == Coupling::Consistent ? "consistent" : "independent"; }

namespace detail {

inline double bridge_spread(double x, double y, double sigma_left, double dt, double u) {
    if (!(u > 0.0) || u > 1.0) throw std::domain_error("bridge sample needs u in (0, 1]");
    if (!(dt > 0.0)) throw std::invalid_argument("bridge sample needs dt > 0");
    const double diff = y - x;
    return std::sqrt(diff * diff - 2.0 * dt * sigma_left * sigma_left * std::log(u));
}

}  // namespace detail

/// Inverse conditional law of the maximum of a frozen-coefficient Euler segment from x to y over dt:
/// G^{-1}(u) = (x + y + sqrt((y-x)^2 - 2 dt sigma^2 log u)) / 2.
inline double bridge_max_sample(double x, double y, double sigma_left, double dt, double u) {
    return 0.5 * (x + y + detail::bridge_spread(x, y, sigma_left, dt, u));
}

/// F^{-1}(u) = (x + y - sqrt((y-x)^2 - 2 dt sigma^2 log u)) / 2.
inline double bridge_min_sample(double x, double y, double sigma_left, double dt, double u) {
    return 0.5 * (x + y - detail::bridge_spread(x, y, sigma_left, dt, u));
}

/// R Euler paths over [0, T], level r with step T/(rn), plus optional bridged extrema (scalar models only).
struct CoupledPathBundle {
    struct Level {
        std::vector<double> states;  // (rn + 1) * d, row k is the state at kT/(rn)
        double bridged_max = std::numeric_limits<double>::quiet_NaN();
        double bridged_min = std::numeric_limits<double>::quiet_NaN();
    };

    int order = 0;
    int steps = 0;  // macro step count n
    double horizon = 0.0;
    std::size_t dimension = 1;
    bool bridged = false;
    Coupling coupling = Coupling::Consistent;
    std::vector<Level> levels;

    std::size_t state_count(int r) const { return levels[static_cast<std::size_t>(r - 1)].states.size() / dimension; }
    std::span<const double> state(int r, std::size_t k) const {
        return std::span<const double>(levels[static_cast<std::size_t>(r - 1)].states).subspan(k * dimension, dimension);
    }
    std::span<const double> terminal(int r) const { return state(r, state_count(r) - 1); }

    /// Min / max over grid states of a scalar level.
    double grid_min(int r) const {
        const auto& s = levels[static_cast<std::size_t>(r - 1)].states;
        return *std::min_element(s.begin(), s.end());
    }
    double grid_max(int r) const {
        const auto& s = levels[static_cast<std::size_t>(r - 1)].states;
        return *std::max_element(s.begin(), s.end());
    }
};

struct SimulationPlan {
    int order = 1;
    int steps = 1;
    double horizon = 1.0;
    Coupling coupling = Coupling::Consistent;
    bool bridged = false;
    const IncrementSchedule* schedule = nullptr;  // required for consistent coupling
};

/// Reusable per-worker buffers for simulate_coupled.
template <SdeModel Model>
struct SchemeWorkspace {
    explicit SchemeWorkspace(const Model& m) : euler(m), dW(m.noise_dimension()) {}
    EulerWorkspace euler;
    IncrementBlock block;
    std::vector<double> atoms;
    std::vector<double> dW;
    std::vector<RandomSource> bridge_rngs;
};

/// Advances all levels macro step by macro step. Gaussians come from `rng`; bridge uniforms of level r come
/// from rng.substream(r), so the skeletons stay coupled while the bridges are independent across levels.
template <SdeModel Model>
void simulate_coupled(const Model& model, const SimulationPlan& plan, RandomSource& rng, CoupledPathBundle& bundle,
                      SchemeWorkspace<Model>& ws) {
    if (plan.order < 1 || plan.steps < 1) throw std::invalid_argument("simulate_coupled: need R >= 1 and n >= 1");
    if (!(plan.horizon > 0.0)) throw std::invalid_argument("simulate_coupled: horizon must be positive");
    if (plan.coupling == Coupling::Consistent && (plan.schedule == nullptr || plan.schedule->order != plan.order))
        throw std::invalid_argument("simulate_coupled: consistent coupling needs a schedule of matching order");
    const std::size_t d = model.dimension();
    const std::size_t q = model.noise_dimension();
    if (plan.bridged && (d != 1)) throw std::invalid_argument("bridged extrema require a scalar model");

    const int R = plan.order;
    const int n = plan.steps;
    bundle.order = R;
    bundle.steps = n;
    bundle.horizon = plan.horizon;
    bundle.dimension = d;
    bundle.bridged = plan.bridged;
    bundle.coupling = plan.coupling;
    bundle.levels.resize(static_cast<std::size_t>(R));

    const auto x0 = model.initial_state();
    for (int r = 1; r <= R; ++r) {
        auto& lvl = bundle.levels[static_cast<std::size_t>(r - 1)];
        lvl.states.resize((static_cast<std::size_t>(r) * n + 1) * d);
        std::copy(x0.begin(), x0.end(), lvl.states.begin());
        lvl.bridged_max = plan.bridged ? x0[0] : std::numeric_limits<double>::quiet_NaN();
        lvl.bridged_min = lvl.bridged_max;
    }
    if (plan.bridged) {
        ws.bridge_rngs.clear();
        for (int r = 1; r <= R; ++r) ws.bridge_rngs.push_back(rng.substream(static_cast<std::uint64_t>(r)));
    }

    for (int m = 0; m < n; ++m) {
        if (plan.coupling == Coupling::Consistent)
            sample_block(*plan.schedule, rng, q, ws.block, ws.atoms);
        else
            sample_independent_block(R, rng, q, ws.block);

        for (int r = 1; r <= R; ++r) {
            auto& lvl = bundle.levels[static_cast<std::size_t>(r - 1)];
            const double dt = plan.horizon / (static_cast<double>(r) * n);
            const double sqrt_dt = std::sqrt(dt);
            for (int k = 1; k <= r; ++k) {
                const std::size_t idx = static_cast<std::size_t>(m) * r + (k - 1);
                const double t = static_cast<double>(idx) * dt;
                const auto u = ws.block.increment(r, k);
                for (std::size_t j = 0; j < q; ++j) ws.dW[j] = sqrt_dt * u[j];
                std::span<const double> x(lvl.states.data() + idx * d, d);
                std::span<double> next(lvl.states.data() + (idx + 1) * d, d);
                euler_step_into(model, t, x, dt, ws.dW, next, ws.euler);
                if (plan.bridged) {
                    // ws.euler.diffusion still holds sigma(t, x) at the left endpoint.
                    double var_rate = 0.0;
                    for (std::size_t j = 0; j < q; ++j) var_rate += ws.euler.diffusion[j] * ws.euler.diffusion[j];
                    const double sig = std::sqrt(var_rate);
                    auto& brng = ws.bridge_rngs[static_cast<std::size_t>(r - 1)];
                    const double hi = bridge_max_sample(x[0], next[0], sig, dt, brng.uniform_open_zero());
                    const double lo = bridge_min_sample(x[0], next[0], sig, dt, brng.uniform_open_zero());
                    lvl.bridged_max = std::max(lvl.bridged_max, hi);
                    lvl.bridged_min = std::min(lvl.bridged_min, lo);
                }
            }
        }
    }
}

template <SdeModel Model>
CoupledPathBundle simulate_coupled(const Model& model, const SimulationPlan& plan, RandomSource& rng) {
    SchemeWorkspace<Model> ws(model);
    CoupledPathBundle bundle;
    simulate_coupled(model, plan, rng, bundle, ws);
    return bundle;
}

}  // namespace rrx
