#pragma once

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "rrx/rrx.hpp"

namespace rrx::cli {

inline constexpr const char* kCsvHeader =
    "experiment,R,n,M,scale,coupling,scheme,estimate,std_err,analytic,abs_err,seed,wall_ms";

struct Options {
    std::uint64_t seed = 1;
    unsigned workers = 1;
    std::string out = "-";
    bool timing = false;

    double spot = 100.0;
    double rate = 0.15;
    double vol = 1.0;
    double horizon = 1.0;

    std::string payoff = "call";
    double strike = 100.0;
    double lambda = 1.1;
    double barrier = 300.0;

    int order = 3;
    int steps = 10;
    std::uint64_t samples = 100000;
    std::string scale = "integer";
    std::string coupling = "consistent";
    std::string scheme = "discrete";
    std::string schedule = "sparing";
    std::vector<int> order_grid;
    std::vector<int> step_grid;

    bool exact = false;

    double budget = 1e8;
    double var_estimate = 0.0;
    double c_tilde = 0.0;
    std::uint64_t pilot_samples = 0;
};

inline PayoffSpec make_payoff(const Options& o) {
    PayoffSpec p;
    if (o.payoff == "call")
        p.kind = VanillaCall{o.strike};
    else if (o.payoff == "lookback")
        p.kind = PartialLookbackCall{o.lambda};
    else if (o.payoff == "up-out")
        p.kind = UpOutCall{o.strike, o.barrier};
    else
        throw ConfigError("unknown payoff '" + o.payoff + "'");
    p.rate = o.rate;
    p.horizon = o.horizon;
    p.validate();
    return p;
}

inline ErrorScale parse_scale(const std::string& s) {
    if (s == "integer") return ErrorScale::integer();
    if (s == "half") return ErrorScale::half_order();
    throw ConfigError("unknown scale '" + s + "'");
}

inline EstimatorConfig make_config(const Options& o, int R, int n) {
    EstimatorConfig c;
    c.payoff = make_payoff(o);
    c.order = R;
    c.steps = n;
    c.samples = o.samples;
    c.scale = parse_scale(o.scale);
    c.coupling = o.coupling == "independent" ? Coupling::Independent : Coupling::Consistent;
    c.scheme = o.scheme == "bridged" ? SchemeKind::Bridged : SchemeKind::Discrete;
    c.schedule = o.schedule == "lazy" ? ScheduleKind::Lazy : ScheduleKind::Sparing;
    c.seed = labeled_seed(o.seed, fmt::format("R={};n={}", R, n));
    c.workers = o.workers;
    return c;
}

inline std::string fmt_double(double v) { return fmt::format("{:.17g}", v); }

inline void write_row(std::ostream& os, const std::string& experiment, const EstimatorConfig& c,
                      const EstimateReport& rep, const Options& o) {
    const auto err = rep.signed_error();
    fmt::print(os, "{},{},{},{},{},{},{},{},{},{},{},{},{}\n", experiment, c.order, c.steps, rep.samples, c.scale.name(),
               to_string(c.coupling), to_string(c.scheme), fmt_double(rep.mean), fmt_double(rep.std_error),
               rep.analytic ? fmt_double(*rep.analytic) : "", err ? fmt_double(std::abs(*err)) : "", o.seed,
               o.timing ? fmt::format("{:.0f}", rep.wall_ms) : "");
}

inline std::string format_rational(const Rational& q) {
    const auto num = boost::multiprecision::numerator(q);
    const auto den = boost::multiprecision::denominator(q);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

inline int run_estimates(const std::string& experiment, const Options& o, const std::vector<int>& orders,
                         const std::vector<int>& steps, std::ostream& os) {
    const BlackScholesModel model(o.spot, o.rate, o.vol);
    os << kCsvHeader << '\n';
    for (int R : orders)
        for (int n : steps) {
            const EstimatorConfig c = make_config(o, R, n);
            write_row(os, experiment, c, estimate(model, c), o);
        }
    return 0;
}

inline int run_variance_ratio(const Options& o, std::ostream& os, std::ostream& err) {
    const BlackScholesModel model(o.spot, o.rate, o.vol);
    const std::vector<int> orders = o.order_grid.empty() ? std::vector<int>{o.order} : o.order_grid;
    const std::vector<int> steps = o.step_grid.empty() ? std::vector<int>{o.steps} : o.step_grid;
    os << kCsvHeader << '\n';
    for (int R : orders) {
        EstimatorConfig c = make_config(o, R, steps.front());
        for (int n : steps) {
            c = make_config(o, R, n);
            const auto rows = variance_ratio_experiment(model, c, {n});
            const auto& row = rows.front();
            c.coupling = Coupling::Consistent;
            write_row(os, "variance-ratio", c, row.consistent, o);
            c.coupling = Coupling::Independent;
            write_row(os, "variance-ratio", c, row.independent, o);
            fmt::print(err, "R={} n={} var_consistent={:.6g} var_independent={:.6g} ratio={:.4f}\n", R, n,
                       row.consistent.variance, row.independent.variance, row.ratio());
        }
    }
    return 0;
}

/// Empirical cross-level covariance of the normalised increments against the overlap formula.
inline int run_noise_audit(const Options& o, std::ostream& os) {
    const int R = o.order;
    const IncrementSchedule schedule = build_schedule(R, o.schedule == "lazy" ? ScheduleKind::Lazy : ScheduleKind::Sparing);
    const std::size_t dim = static_cast<std::size_t>(R) * (R + 1) / 2;
    std::vector<double> sum(dim, 0.0);
    std::vector<double> cross(dim * dim, 0.0);
    IncrementBlock block;
    std::vector<double> atoms;
    const std::uint64_t seed = labeled_seed(o.seed, "noise-audit");
    for (std::uint64_t s = 0; s < o.samples; ++s) {
        RandomSource rng(seed, s);
        if (o.coupling == "independent")
            sample_independent_block(R, rng, 1, block);
        else
            sample_block(schedule, rng, 1, block, atoms);
        const auto v = block.values();
        for (std::size_t i = 0; i < dim; ++i) {
            sum[i] += v[i];
            for (std::size_t j = 0; j < dim; ++j) cross[i * dim + j] += v[i] * v[j];
        }
    }
    std::vector<std::pair<int, int>> index;
    for (int r = 1; r <= R; ++r)
        for (int k = 1; k <= r; ++k) index.emplace_back(r, k);
    const double m = static_cast<double>(o.samples);
    os << "row_level,row_k,col_level,col_k,empirical,oracle\n";
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) {
            const double cov = cross[i * dim + j] / m - (sum[i] / m) * (sum[j] / m);
            const double oracle = o.coupling == "independent"
                                      ? (i == j ? 1.0 : 0.0)
                                      : overlap_covariance(index[i].first, index[i].second, index[j].first,
                                                           index[j].second);
            fmt::print(os, "{},{},{},{},{},{}\n", index[i].first, index[i].second, index[j].first, index[j].second,
                       fmt_double(cov), fmt_double(oracle));
        }
    return 0;
}

inline int run_weights(const Options& o, std::ostream& os) {
    os << "r,alpha_r\n";
    if (o.exact) {
        if (o.scale != "integer") throw ConfigError("--exact is only available for the integer scale");
        const auto w = standard_weights_exact(o.order);
        for (int r = 1; r <= o.order; ++r) os << r << ',' << format_rational(w.weights[static_cast<std::size_t>(r - 1)]) << '\n';
        return 0;
    }
    const auto w = weights_for_scale(o.order, parse_scale(o.scale));
    for (int r = 1; r <= o.order; ++r) os << r << ',' << fmt_double(w.weights[static_cast<std::size_t>(r - 1)]) << '\n';
    return 0;
}

inline int run_plan(const Options& o, std::ostream& os, std::ostream& err) {
    double var = o.var_estimate;
    double c = o.c_tilde;
    std::optional<PilotEstimate> pilot;
    if (o.pilot_samples > 0) {
        const BlackScholesModel model(o.spot, o.rate, o.vol);
        EstimatorConfig cfg = make_config(o, o.order, o.steps);
        pilot = pilot_estimate_c(model, cfg, o.pilot_samples);
        if (pilot->reliable) {
            c = pilot->c_tilde;
        } else {
            fmt::print(err, "pilot estimate of c~ too noisy ({:.4g} +/- {:.4g}); using --c-tilde\n", pilot->c_tilde,
                       pilot->std_error);
        }
        if (var <= 0.0) {
            EstimatorConfig fine = cfg;
            fine.order = 1;
            fine.steps = 10 * o.steps * o.order;
            fine.samples = o.pilot_samples;
            fine.scale = ErrorScale::integer();
            fine.scheme = SchemeKind::Bridged;
            var = estimate(model, fine).variance;
        }
    }
    const BudgetPlan p = plan_budget(o.order, o.budget, var, c);
    os << "key,value\n";
    fmt::print(os, "R,{}\nbudget,{}\nvar_estimate,{}\nc_tilde_estimate,{}\n", p.order, fmt_double(p.budget),
               fmt_double(p.var_estimate), fmt_double(p.c_tilde_estimate));
    if (pilot) fmt::print(os, "pilot_c_tilde,{}\npilot_std_err,{}\n", fmt_double(pilot->c_tilde), fmt_double(pilot->std_error));
    fmt::print(os, "n_asymptotic,{}\nM_asymptotic,{}\nn_star,{}\nM_star,{}\ntheta,{}\nM_from_relation,{}\n",
               fmt_double(p.n_asymptotic), fmt_double(p.m_asymptotic), p.n_star, p.m_star, fmt_double(p.theta),
               fmt_double(p.m_from_relation));
    return 0;
}

inline int run_analytic(const Options& o, std::ostream& os) {
    const PayoffSpec p = make_payoff(o);
    fmt::print(os, "{}\n", fmt_double(black_scholes_reference(p, o.spot, o.vol)));
    return 0;
}

/// Parses arguments and runs one experiment. Exit codes: 0 success, 1 configuration error, 2 blow-up abort.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-step Richardson-Romberg extrapolation of Euler Monte Carlo", "rr"};
    app.fallthrough();
    app.require_subcommand(1, 1);
    app.set_config("--config", "", "Flat key=value file; command-line flags override it");

    Options o;
    app.add_option("--seed", o.seed, "Master seed; every experiment stream derives from it")->envname("RR_SEED");
    app.add_option("--workers", o.workers, "Worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
    app.add_option("--out", o.out, "Output CSV path, '-' for stdout");
    app.add_flag("--timing", o.timing, "Fill the wall_ms column (makes output run-dependent)");

    app.add_option("--spot", o.spot, "Black-Scholes initial value X0")->check(CLI::PositiveNumber);
    app.add_option("--rate", o.rate, "Risk-free rate r (drift and discounting)");
    app.add_option("--vol", o.vol, "Black-Scholes volatility")->check(CLI::NonNegativeNumber);
    app.add_option("--T", o.horizon, "Maturity")->check(CLI::PositiveNumber);

    app.add_option("--payoff", o.payoff, "call | lookback | up-out")
        ->check(CLI::IsMember({"call", "lookback", "up-out"}));
    app.add_option("--K", o.strike, "Strike");
    app.add_option("--lambda", o.lambda, "Partial lookback coefficient");
    app.add_option("--L", o.barrier, "Up-and-out barrier");

    app.add_option("--R,--order", o.order, "Extrapolation order R")->check(CLI::Range(1, kMaxOrder));
    app.add_option("--n", o.steps, "Macro time steps n")->check(CLI::PositiveNumber);
    app.add_option("--M,--samples", o.samples, "Monte Carlo paths")->check(CLI::PositiveNumber);
    app.add_option("--scale", o.scale, "integer | half")->check(CLI::IsMember({"integer", "half"}));
    app.add_option("--coupling", o.coupling, "consistent | independent")
        ->check(CLI::IsMember({"consistent", "independent"}));
    app.add_option("--scheme", o.scheme, "discrete | bridged")->check(CLI::IsMember({"discrete", "bridged"}));
    app.add_option("--schedule", o.schedule, "sparing | lazy")->check(CLI::IsMember({"sparing", "lazy"}));
    app.add_option("--R-grid", o.order_grid, "Orders for sweep-like experiments")->delimiter(',');
    app.add_option("--n-grid", o.step_grid, "Macro step counts for sweep-like experiments")->delimiter(',');

    app.add_flag("--exact", o.exact, "Exact rational weights (integer scale)");
    app.add_option("--budget", o.budget, "Total complexity N in unit Euler steps")->check(CLI::PositiveNumber);
    app.add_option("--var", o.var_estimate, "Estimate of Var f(X_T)");
    app.add_option("--c-tilde", o.c_tilde, "Estimate of |c~_R|");
    app.add_option("--pilot-M", o.pilot_samples, "Pilot paths for estimating c~_R (0 disables)");

    auto* price = app.add_subcommand("price", "Single estimate");
    auto* sweep = app.add_subcommand("sweep", "Estimates over --R-grid x --n-grid");
    auto* table1 = app.add_subcommand("table1", "Black-Scholes call, R in {3,4}, n in {2,4,6,8,10}");
    auto* vratio = app.add_subcommand("variance-ratio", "Consistent vs independent coupling variance");
    auto* audit = app.add_subcommand("noise-audit", "Cross-level covariance of sampled increments");
    auto* weights = app.add_subcommand("weights", "Print extrapolation weights as r,alpha_r");
    auto* plan = app.add_subcommand("plan", "Complexity-optimal (n, M) for a budget");
    auto* analytic = app.add_subcommand("analytic", "Closed-form Black-Scholes premium");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        fmt::print(err, "rr: {}\n", e.what());
        return 1;
    }

    std::ofstream file;
    std::ostream* os = &out;
    if (o.out != "-") {
        file.open(o.out);
        if (!file) {
            fmt::print(err, "rr: cannot open {}\n", o.out);
            return 1;
        }
        os = &file;
    }

    try {
        if (*price) return run_estimates("price", o, {o.order}, {o.steps}, *os);
        if (*sweep) {
            return run_estimates("sweep", o, o.order_grid.empty() ? std::vector<int>{o.order} : o.order_grid,
                                 o.step_grid.empty() ? std::vector<int>{o.steps} : o.step_grid, *os);
        }
        if (*table1) {
            Options t = o;
            t.payoff = "call";
            return run_estimates("table1", t, o.order_grid.empty() ? std::vector<int>{3, 4} : o.order_grid,
                                 o.step_grid.empty() ? std::vector<int>{2, 4, 6, 8, 10} : o.step_grid, *os);
        }
        if (*vratio) return run_variance_ratio(o, *os, err);
        if (*audit) return run_noise_audit(o, *os);
        if (*weights) return run_weights(o, *os);
        if (*plan) return run_plan(o, *os, err);
        if (*analytic) return run_analytic(o, *os);
    } catch (const EstimationAborted& e) {
        fmt::print(err, "rr: {}\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        fmt::print(err, "rr: {}\n", e.what());
        return 1;
    }
    return 1;
}

}  // namespace rrx::cli
