#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace rrx {

/// Standard normal CDF through erfc, accurate to a few ulps over the whole real line.
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// log N(x), finite far into the lower tail where N(x) itself underflows.
inline double log_norm_cdf(double x) {
    if (x > 5.0) return std::log1p(-0.5 * std::erfc(x / std::numbers::sqrt2));
    if (x > -37.0) return std::log(norm_cdf(x));
    // Mills-ratio series; the truncation error is below 1e-10 relative here.
    const double z = 1.0 / (x * x);
    return -0.5 * x * x - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) +
           std::log1p(z * (-1.0 + z * (3.0 + z * (-15.0 + z * 105.0))));
}

/// log(N(a) - N(b)) for a >= b, taken on the tail nearer to both arguments so nothing cancels.
inline double log_norm_cdf_diff(double a, double b) {
    if (!(a > b)) return -std::numeric_limits<double>::infinity();
    const auto tail = [](double near, double far) { return near + std::log1p(-std::exp(far - near)); };
    if (b >= 0.0) return tail(log_norm_cdf(-b), log_norm_cdf(-a));
    if (a <= 0.0) return tail(log_norm_cdf(a), log_norm_cdf(b));
    return std::log(norm_cdf(a) - norm_cdf(b));
}

/// Black-Scholes call, no dividends. A non-positive strike degenerates to a forward: S0 - K e^{-rT}.
inline double bs_call(double spot, double strike, double vol, double rate, double T) {
    if (!(spot > 0.0) || !(vol > 0.0) || !(T > 0.0))
        throw std::invalid_argument("bs_call: spot, vol and maturity must be positive");
    const double df = std::exp(-rate * T);
    if (strike <= 0.0) return spot - strike * df;
    const double sd = vol * std::sqrt(T);
    const double d1 = (std::log(spot / strike) + (rate + 0.5 * vol * vol) * T) / sd;
    const double d2 = d1 - sd;
    return spot * norm_cdf(d1) - strike * df * norm_cdf(d2);
}

inline double bs_put(double spot, double strike, double vol, double rate, double T) {
    if (!(spot > 0.0) || !(vol > 0.0) || !(T > 0.0))
        throw std::invalid_argument("bs_put: spot, vol and maturity must be positive");
    const double df = std::exp(-rate * T);
    if (strike <= 0.0) return 0.0;
    const double sd = vol * std::sqrt(T);
    const double d1 = (std::log(spot / strike) + (rate + 0.5 * vol * vol) * T) / sd;
    const double d2 = d1 - sd;
    return strike * df * norm_cdf(-d2) - spot * norm_cdf(-d1);
}

/// Partial lookback call e^{-rT} E (X_T - lambda min_{[0,T]} X)_+ :
/// S0 Call(1, lambda, vol, r, T) + lambda vol^2/(2r) S0 Put(lambda^{2r/vol^2}, 1, 2r/vol, r, T).
/// The put's spot term is formed in log space since lambda^{2r/vol^2} overflows for small vol.
inline double bs_partial_lookback(double spot, double lambda, double vol, double rate, double T) {
    if (!(rate > 0.0)) throw std::invalid_argument("bs_partial_lookback: rate must be positive");
    if (!(lambda > 0.0)) throw std::invalid_argument("bs_partial_lookback: lambda must be positive");
    if (!(spot > 0.0) || !(vol > 0.0) || !(T > 0.0))
        throw std::invalid_argument("bs_partial_lookback: spot, vol and maturity must be positive");
    const double mu = 2.0 * rate / (vol * vol);
    const double put_vol = 2.0 * rate / vol;
    const double sd = put_vol * std::sqrt(T);
    const double log_spot = mu * std::log(lambda);
    const double d1 = (log_spot + (rate + 0.5 * put_vol * put_vol) * T) / sd;
    const double d2 = d1 - sd;
    const double put = std::exp(-rate * T) * norm_cdf(-d2) - std::exp(log_spot + log_norm_cdf(-d1));
    return spot * bs_call(1.0, lambda, vol, rate, T) + lambda * (vol * vol / (2.0 * rate)) * spot * std::max(put, 0.0);
}

/// Up-and-out call with strike K and barrier L >= K, monitored continuously. Reflection form
///   P(K, L) - (L/S0)^{1+2r/vol^2} P(K (S0/L)^2, L (S0/L)^2),
/// with P(k, l) the price of (X_T - k) 1{k < X_T < l}. The reflected term multiplies a huge power by a far
/// tail, so each piece is assembled in log space.
inline double bs_up_out(double spot, double strike, double barrier, double vol, double rate, double T) {
    if (strike < 0.0 || barrier < strike) throw std::invalid_argument("bs_up_out: need 0 <= K <= L");
    if (!(spot > 0.0) || !(vol > 0.0) || !(T > 0.0))
        throw std::invalid_argument("bs_up_out: spot, vol and maturity must be positive");
    if (spot >= barrier) return 0.0;
    const double df = std::exp(-rate * T);
    const double sd = vol * std::sqrt(T);
    const double mu = 2.0 * rate / (vol * vol);
    const double log_ratio = std::log(barrier / spot);
    const double inf = std::numeric_limits<double>::infinity();
    // d_1 for level exp(log_level); a zero strike sits at -infinity.
    const auto d1 = [&](double log_level) { return (std::log(spot) - log_level + (rate + 0.5 * vol * vol) * T) / sd; };
    const double log_k = strike > 0.0 ? std::log(strike) : -inf;
    const double log_l = std::log(barrier);
    // log_scale is log of the reflection power applied to each piece.
    const auto band = [&](double lk, double ll, double log_scale_spot, double log_scale_strike) {
        const double a = d1(lk), b = d1(ll);
        double value = std::exp(log_scale_spot + std::log(spot) + log_norm_cdf_diff(a, b));
        if (strike > 0.0) value -= strike * df * std::exp(log_scale_strike + log_norm_cdf_diff(a - sd, b - sd));
        return value;
    };
    const double direct = band(log_k, log_l, 0.0, 0.0);
    // K' = K (S/L)^2 carries (S/L)^2 into the strike piece, lowering its power to mu - 1.
    const double reflected = band(log_k - 2.0 * log_ratio, log_l - 2.0 * log_ratio, (1.0 + mu) * log_ratio,
                                  (mu - 1.0) * log_ratio);
    return std::max(direct - reflected, 0.0);
}

}  // namespace rrx
