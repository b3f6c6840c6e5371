#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "rrx/model.hpp"
#include "rrx/noise.hpp"
#include "rrx/payoff.hpp"
#include "rrx/random.hpp"
#include "rrx/scheme.hpp"
#include "rrx/stats.hpp"
#include "rrx/weights.hpp"

namespace rrx {

/// Paths per batch. Fixed so that the merge tree, and therefore every reported digit, does not depend on
/// the worker count.
inline constexpr std::uint64_t kBatchSize = 4096;

/// Runs are aborted when more than this fraction of paths blow up.
inline constexpr double kBlowUpTolerance = 1e-4;

enum class SchemeKind { Discrete, Bridged };

inline const char* to_string(SchemeKind s) { return s == SchemeKind::Discrete ? "discrete" : "bridged"; }

struct EstimatorConfig {
    PayoffSpec payoff;
    int order = 1;
    int steps = 1;
    std::uint64_t samples = 1;
    ErrorScale scale = ErrorScale::integer();
    Coupling coupling = Coupling::Consistent;
    SchemeKind scheme = SchemeKind::Discrete;
    ScheduleKind schedule = ScheduleKind::Sparing;
    std::uint64_t seed = 1;
    unsigned workers = 1;
};

struct EstimateReport {
    double mean = 0.0;
    double variance = 0.0;
    double std_error = 0.0;
    std::uint64_t samples = 0;
    int steps = 0;
    int order = 0;
    double wall_ms = 0.0;
    std::uint64_t normals = 0;
    std::uint64_t blowups = 0;
    std::vector<double> level_means;
    std::optional<double> analytic;

    std::optional<double> signed_error() const {
        if (!analytic) return std::nullopt;
        return mean - *analytic;
    }
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class EstimationAborted : public std::runtime_error {
public:
    EstimationAborted(std::uint64_t blowups, std::uint64_t samples, const std::string& first)
        : std::runtime_error("aborted: " + std::to_string(blowups) + " of " + std::to_string(samples) +
                             " paths blew up (first: " + first + ")"),
          blowups_(blowups) {}
    std::uint64_t blowups() const { return blowups_; }

private:
    std::uint64_t blowups_;
};

/// Rejects scale/scheme pairs not backed by a known error expansion:
/// half-order weights go with the stepwise constant scheme on path-dependent payoffs, bridged
/// extrema with integer weights, and a stepwise constant path-dependent extrapolation needs the half-order scale.
inline void validate(const EstimatorConfig& c) {
    if (c.order < 1 || c.order > kMaxOrder) throw ConfigError("R must lie in 1.." + std::to_string(kMaxOrder));
    if (c.steps < 1) throw ConfigError("n must be >= 1");
    if (c.samples < 1) throw ConfigError("M must be >= 1");
    c.payoff.validate();
    if (c.order == 1) return;
    if (c.scale.kind == ScaleKind::HalfOrder) {
        if (c.scheme != SchemeKind::Discrete) throw ConfigError("half-order scale requires the discrete scheme");
        if (!c.payoff.path_dependent()) throw ConfigError("half-order scale requires a path-dependent payoff");
    }
    if (c.scheme == SchemeKind::Bridged && c.scale.kind != ScaleKind::Integer)
        throw ConfigError("bridged scheme requires the integer scale");
    if (c.scheme == SchemeKind::Discrete && c.payoff.path_dependent() && c.scale.kind == ScaleKind::Integer)
        throw ConfigError("discrete path-dependent extrapolation requires the half-order scale");
}

namespace detail {

struct BatchResult {
    RunningStats combined;
    std::vector<RunningStats> levels;
    std::uint64_t blowups = 0;
    std::uint64_t normals = 0;
    std::string first_blowup;
};

/// Evaluates paths [0, M) in fixed batches, possibly in parallel, and merges batches in index order.
/// `factory()` is called once per worker and must return a sampler callable as
/// sampler(RandomSource&, std::span<double> level_values).
template <class Factory>
EstimateReport run_paths(const std::vector<double>& weights, std::uint64_t M, std::uint64_t seed, unsigned workers,
                         Factory&& factory) {
    const auto start = std::chrono::steady_clock::now();
    const std::size_t R = weights.size();
    const std::uint64_t batches = (M + kBatchSize - 1) / kBatchSize;
    std::vector<BatchResult> results(batches);
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto work = [&] {
        try {
            auto sampler = factory();
            std::vector<double> values(R);
            for (std::uint64_t b = next++; b < batches; b = next++) {
                BatchResult& res = results[b];
                res.levels.assign(R, RunningStats{});
                const std::uint64_t last = std::min(M, (b + 1) * kBatchSize);
                for (std::uint64_t p = b * kBatchSize; p < last; ++p) {
                    RandomSource rng(seed, p);
                    try {
                        sampler(rng, std::span<double>(values));
                    } catch (const NumericalBlowUp& e) {
                        if (res.blowups++ == 0) res.first_blowup = e.what();
                        res.normals += rng.normals_drawn();
                        continue;
                    }
                    res.normals += rng.normals_drawn();
                    // Large alternating weights cancel; the extra precision keeps the sum near the rounding of its terms.
                    long double combined = 0.0L;
                    for (std::size_t r = 0; r < R; ++r) {
                        combined += static_cast<long double>(weights[r]) * values[r];
                        res.levels[r].add(values[r]);
                    }
                    res.combined.add(static_cast<double>(combined));
                }
            }
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = batches;
        }
    };

    const unsigned threads = std::max(1u, workers);
    if (threads == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    RunningStats combined;
    std::vector<RunningStats> levels(R);
    EstimateReport rep;
    std::string first;
    for (const auto& res : results) {
        combined.merge(res.combined);
        for (std::size_t r = 0; r < R; ++r) levels[r].merge(res.levels[r]);
        rep.blowups += res.blowups;
        rep.normals += res.normals;
        if (first.empty()) first = res.first_blowup;
    }
    if (static_cast<double>(rep.blowups) > kBlowUpTolerance * static_cast<double>(M))
        throw EstimationAborted(rep.blowups, M, first);

    rep.mean = combined.mean;
    rep.variance = combined.variance();
    rep.std_error = combined.std_error();
    rep.samples = combined.count;
    rep.order = static_cast<int>(R);
    for (const auto& l : levels) rep.level_means.push_back(l.mean);
    rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

}  // namespace detail

/// Combined estimator sum_r alpha_r v_r over M paths for an arbitrary per-level sampler.
template <class Factory>
EstimateReport estimate_with(const WeightVector& weights, std::uint64_t M, std::uint64_t seed, unsigned workers,
                             Factory&& factory) {
    if (M < 1) throw ConfigError("M must be >= 1");
    return detail::run_paths(weights.weights, M, seed, workers, std::forward<Factory>(factory));
}

/// Per-worker sampler: simulates one coupled bundle and evaluates the payoff on every level.
template <SdeModel Model>
class PathSampler {
public:
    PathSampler(const Model& model, const PayoffSpec& payoff, const SimulationPlan& plan)
        : model_(&model), payoff_(&payoff), plan_(plan), ws_(model) {}

    void operator()(RandomSource& rng, std::span<double> values) {
        simulate_coupled(*model_, plan_, rng, bundle_, ws_);
        for (int r = 1; r <= plan_.order; ++r) values[static_cast<std::size_t>(r - 1)] = evaluate(*payoff_, observe(bundle_, r));
    }

private:
    const Model* model_;
    const PayoffSpec* payoff_;
    SimulationPlan plan_;
    SchemeWorkspace<Model> ws_;
    CoupledPathBundle bundle_;
};

/// Multi-step Richardson-Romberg estimate of E f(X) for the configured model and payoff.
template <SdeModel Model>
EstimateReport estimate(const Model& model, const EstimatorConfig& config) {
    validate(config);
    const WeightVector weights = weights_for_scale(config.order, config.scale);
    const IncrementSchedule schedule = build_schedule(config.order, config.schedule);
    PayoffSpec payoff = config.payoff;
    payoff.extrema = config.scheme == SchemeKind::Bridged ? ExtremaSource::Bridged : ExtremaSource::DiscreteGrid;
    SimulationPlan plan;
    plan.order = config.order;
    plan.steps = config.steps;
    plan.horizon = payoff.horizon;
    plan.coupling = config.coupling;
    plan.bridged = config.scheme == SchemeKind::Bridged;
    plan.schedule = &schedule;

    EstimateReport rep = estimate_with(weights, config.samples, config.seed, config.workers,
                                       [&] { return PathSampler<Model>(model, payoff, plan); });
    rep.steps = config.steps;
    if constexpr (std::is_same_v<Model, BlackScholesModel>) {
        if (model.vol() > 0.0 && std::abs(model.rate() - payoff.rate) < 1e-15)
            rep.analytic = black_scholes_reference(payoff, model.spot(), model.vol());
    }
    return rep;
}

struct VarianceRatioRow {
    int steps;
    EstimateReport consistent;
    EstimateReport independent;

    /// Var(independent) / Var(consistent); NaN when both are zero.
    double ratio() const {
        if (consistent.variance == 0.0) return independent.variance == 0.0 ? std::nan("") : std::numeric_limits<double>::infinity();
        return independent.variance / consistent.variance;
    }
};

/// Combined-estimator variance under consistent and independent coupling for each n in the grid.
template <SdeModel Model>
std::vector<VarianceRatioRow> variance_ratio_experiment(const Model& model, EstimatorConfig config,
                                                        const std::vector<int>& n_grid) {
    std::vector<VarianceRatioRow> rows;
    for (int n : n_grid) {
        config.steps = n;
        config.coupling = Coupling::Consistent;
        EstimateReport cons = estimate(model, config);
        config.coupling = Coupling::Independent;
        EstimateReport indep = estimate(model, config);
        rows.push_back({n, std::move(cons), std::move(indep)});
    }
    return rows;
}

/// Leading residual exponent after R-level extrapolation: R for the integer scale, R/2 for half-order.
inline double residual_exponent(int R, const ErrorScale& scale) {
    if (scale.kind == ScaleKind::HalfOrder) return 0.5 * R;
    if (scale.kind == ScaleKind::Custom && static_cast<int>(scale.exponents.size()) >= R)
        return scale.exponents[static_cast<std::size_t>(R - 1)];
    return static_cast<double>(R);
}

struct PilotEstimate {
    double c_tilde = 0.0;  // |c~_R|
    double std_error = 0.0;
    bool reliable = false;  // std_error below the estimate
};

/// Rough |c~_R| from two combined estimates at n and 2n: bias(n) ~ c~_R n^{-gamma}, so
/// c~_R ~ n^gamma (E_n - E_2n) / (1 - 2^{-gamma}). The two runs use independent seeds.
template <class EstimateAt>
PilotEstimate pilot_estimate_c_with(int steps, double gamma, EstimateAt&& estimate_at) {
    const EstimateReport coarse = estimate_at(steps, 0);
    const EstimateReport fine = estimate_at(2 * steps, 1);
    const double scale = std::pow(static_cast<double>(steps), gamma) / (1.0 - std::pow(2.0, -gamma));
    PilotEstimate p;
    p.c_tilde = std::abs(scale * (coarse.mean - fine.mean));
    p.std_error = scale * std::sqrt(coarse.std_error * coarse.std_error + fine.std_error * fine.std_error);
    p.reliable = p.std_error < p.c_tilde;
    return p;
}

template <SdeModel Model>
PilotEstimate pilot_estimate_c(const Model& model, EstimatorConfig config, std::uint64_t pilot_samples) {
    if (pilot_samples < 1000) throw ConfigError("pilot needs at least 1000 samples");
    config.samples = pilot_samples;
    const std::uint64_t base_seed = config.seed;
    return pilot_estimate_c_with(config.steps, residual_exponent(config.order, config.scale), [&](int n, int which) {
        config.steps = n;
        config.seed = labeled_seed(base_seed, which == 0 ? "pilot/coarse" : "pilot/fine");
        return estimate(model, config);
    });
}

}  // namespace rrx
