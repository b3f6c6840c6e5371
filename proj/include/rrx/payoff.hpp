#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>

#include "rrx/analytics.hpp"
#include "rrx/scheme.hpp"

namespace rrx {

struct VanillaCall {
    double strike;
};

/// (X_T - lambda * min X)_+
struct PartialLookbackCall {
    double lambda;
};

/// (X_T - K)_+ 1{max X <= L}
struct UpOutCall {
    double strike;
    double barrier;
};

enum class ExtremaSource { DiscreteGrid, Bridged };

struct PayoffSpec {
    std::variant<VanillaCall, PartialLookbackCall, UpOutCall> kind;
    double rate = 0.0;
    double horizon = 1.0;
    ExtremaSource extrema = ExtremaSource::DiscreteGrid;

    void validate() const {
        if (const auto* c = std::get_if<VanillaCall>(&kind); c && c->strike < 0.0)
            throw std::invalid_argument("payoff: strike must be >= 0");
        if (const auto* l = std::get_if<PartialLookbackCall>(&kind); l && !(l->lambda > 0.0))
            throw std::invalid_argument("payoff: lambda must be > 0");
        if (const auto* u = std::get_if<UpOutCall>(&kind); u && (u->strike < 0.0 || u->barrier < u->strike))
            throw std::invalid_argument("payoff: need 0 <= K <= L");
    }

    bool path_dependent() const { return !std::holds_alternative<VanillaCall>(kind); }

    std::string name() const {
        if (std::holds_alternative<VanillaCall>(kind)) return "call";
        if (std::holds_alternative<PartialLookbackCall>(kind)) return "lookback";
        return "up-out";
    }
};

/// What a payoff sees of one level: terminal value and the running extrema it may need.
struct LevelObservation {
    double terminal;
    double grid_min;
    double grid_max;
    double bridged_min = std::numeric_limits<double>::quiet_NaN();
    double bridged_max = std::numeric_limits<double>::quiet_NaN();
};

inline LevelObservation observe(const CoupledPathBundle& bundle, int r) {
    const auto& lvl = bundle.levels[static_cast<std::size_t>(r - 1)];
    return {bundle.terminal(r)[0], bundle.grid_min(r), bundle.grid_max(r), lvl.bridged_min, lvl.bridged_max};
}

/// Discounted payoff e^{-rT} Phi(terminal, extrema).
inline double evaluate(const PayoffSpec& payoff, const LevelObservation& obs) {
    const bool bridged = payoff.extrema == ExtremaSource::Bridged;
    if (bridged && payoff.path_dependent() && (std::isnan(obs.bridged_min) || std::isnan(obs.bridged_max)))
        throw std::invalid_argument("payoff: bridged extrema requested but not simulated");
    const double lo = bridged ? obs.bridged_min : obs.grid_min;
    const double hi = bridged ? obs.bridged_max : obs.grid_max;
    const double df = std::exp(-payoff.rate * payoff.horizon);
    return std::visit(
        [&](const auto& p) -> double {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, VanillaCall>) {
                return df * std::max(obs.terminal - p.strike, 0.0);
            } else if constexpr (std::is_same_v<P, PartialLookbackCall>) {
                return df * std::max(obs.terminal - p.lambda * lo, 0.0);
            } else {
                return hi <= p.barrier ? df * std::max(obs.terminal - p.strike, 0.0) : 0.0;
            }
        },
        payoff.kind);
}

/// Closed-form Black-Scholes price of the payoff, continuously monitored.
inline double black_scholes_reference(const PayoffSpec& payoff, double spot, double vol) {
    return std::visit(
        [&](const auto& p) -> double {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, VanillaCall>) {
                return bs_call(spot, p.strike, vol, payoff.rate, payoff.horizon);
            } else if constexpr (std::is_same_v<P, PartialLookbackCall>) {
                return bs_partial_lookback(spot, p.lambda, vol, payoff.rate, payoff.horizon);
            } else {
                return bs_up_out(spot, p.strike, p.barrier, vol, payoff.rate, payoff.horizon);
            }
        },
        payoff.kind);
}

}  // namespace rrx
