#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rrx {

/// dX_t = b(t, X_t) dt + sigma(t, X_t) dW_t with X in R^d and W in R^q.
/// `diffusion` writes the d x q matrix row-major. Evaluations must not mutate the model.
template <class M>
concept SdeModel = requires(const M& m, double t, std::span<const double> x, std::span<double> out) {
    { m.dimension() } -> std::convertible_to<std::size_t>;
    { m.noise_dimension() } -> std::convertible_to<std::size_t>;
    { m.initial_state() } -> std::convertible_to<std::span<const double>>;
    m.drift(t, x, out);
    m.diffusion(t, x, out);
};

/// Risk-neutral Black-Scholes: dX = X (rate dt + vol dW).
class BlackScholesModel {
public:
    BlackScholesModel(double spot, double rate, double vol) : x0_{spot}, rate_(rate), vol_(vol) {}

    std::size_t dimension() const { return 1; }
    std::size_t noise_dimension() const { return 1; }
    std::span<const double> initial_state() const { return x0_; }
    double spot() const { return x0_[0]; }
    double rate() const { return rate_; }
    double vol() const { return vol_; }

    void drift(double, std::span<const double> x, std::span<double> out) const { out[0] = rate_ * x[0]; }
    void diffusion(double, std::span<const double> x, std::span<double> out) const { out[0] = vol_ * x[0]; }

private:
    std::vector<double> x0_;
    double rate_;
    double vol_;
};

/// Scalar model from two callables b(t, x) and sigma(t, x).
template <class Drift, class Diffusion>
class ScalarModel {
public:
    ScalarModel(double x0, Drift b, Diffusion sigma) : x0_{x0}, b_(std::move(b)), sigma_(std::move(sigma)) {}

    std::size_t dimension() const { return 1; }
    std::size_t noise_dimension() const { return 1; }
    std::span<const double> initial_state() const { return x0_; }

    void drift(double t, std::span<const double> x, std::span<double> out) const { out[0] = b_(t, x[0]); }
    void diffusion(double t, std::span<const double> x, std::span<double> out) const { out[0] = sigma_(t, x[0]); }

private:
    std::vector<double> x0_;
    Drift b_;
    Diffusion sigma_;
};

template <class Drift, class Diffusion>
ScalarModel<Drift, Diffusion> make_scalar_model(double x0, Drift b, Diffusion sigma) {
    return {x0, std::move(b), std::move(sigma)};
}

/// Raised when an Euler step produces a non-finite state.
class NumericalBlowUp : public std::runtime_error {
public:
    NumericalBlowUp(double t, std::vector<double> x)
        : std::runtime_error(describe(t, x)), time_(t), state_(std::move(x)) {}

    double time() const { return time_; }
    const std::vector<double>& state() const { return state_; }

private:
    static std::string describe(double t, const std::vector<double>& x) {
        std::ostringstream os;
        os << "numerical blow-up at t=" << t << ", x=(";
        for (std::size_t i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
        os << ")";
        return os.str();
    }

    double time_;
    std::vector<double> state_;
};

/// Scratch buffers for euler_step_into, sized once per model.
struct EulerWorkspace {
    std::vector<double> drift;
    std::vector<double> diffusion;

    template <SdeModel Model>
    explicit EulerWorkspace(const Model& m) : drift(m.dimension()), diffusion(m.dimension() * m.noise_dimension()) {}
};

/// out = x + b(t,x) dt + sigma(t,x) dW, where dW holds raw Brownian increments (variance dt).
/// `out` may alias `x`.
template <SdeModel Model>
void euler_step_into(const Model& model, double t, std::span<const double> x, double dt, std::span<const double> dW,
                     std::span<double> out, EulerWorkspace& ws) {
    const std::size_t d = model.dimension();
    const std::size_t q = model.noise_dimension();
    model.drift(t, x, ws.drift);
    model.diffusion(t, x, ws.diffusion);
    bool finite = true;
    for (std::size_t i = 0; i < d; ++i) {
        double v = x[i] + ws.drift[i] * dt;
        for (std::size_t j = 0; j < q; ++j) v += ws.diffusion[i * q + j] * dW[j];
        out[i] = v;
        finite = finite && std::isfinite(v);
    }
    if (!finite) throw NumericalBlowUp(t, std::vector<double>(x.begin(), x.end()));
}

template <SdeModel Model>
std::vector<double> euler_step(const Model& model, double t, std::span<const double> x, double dt,
                               std::span<const double> dW) {
    if (!(dt > 0.0)) throw std::invalid_argument("euler_step: dt must be positive");
    EulerWorkspace ws(model);
    std::vector<double> out(model.dimension());
    euler_step_into(model, t, x, dt, dW, out, ws);
    return out;
}

}  // namespace rrx
