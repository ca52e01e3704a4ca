#include "atomsim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "detail/stepping.hpp"

namespace atomsim {

namespace {

using State6 = std::array<double, 6>;  // x, p, g1, g2, G1, G2

bool finite(const AtomState& s) {
    return std::isfinite(s.x) && std::isfinite(s.p) &&
           std::isfinite(s.g.real()) && std::isfinite(s.g.imag()) &&
           std::isfinite(s.G.real()) && std::isfinite(s.G.imag());
}

struct MainSystem {
    SimParams params;

    void operator()(const State6& y, State6& dydt, double tau) const {
        const double w = field_amplitude(params.profile, tau);
        const double c = std::cos(y[0]);
        const double s = std::sin(y[0]);
        const double u = 2.0 * (y[2] * y[4] + y[3] * y[5]);
        dydt[0] = params.omega_r * y[1];
        dydt[1] = w * u * s;
        dydt[2] = -w * c * y[5];
        dydt[3] = w * c * y[4];
        dydt[4] = params.delta * y[5] - w * c * y[3];
        dydt[5] = -params.delta * y[4] + w * c * y[2];
    }
};

} // namespace

double field_amplitude(const FieldProfile& profile, double tau) {
    if (const auto* gauss = std::get_if<GaussianField>(&profile)) {
        const double arg = (tau - 1.5 * gauss->sigma_tau) / gauss->sigma_tau;
        return std::exp(-arg * arg);
    }
    return 1.0;
}

void validate(const SimParams& params) {
    if (!std::isfinite(params.omega_r) || params.omega_r < 0.0)
        throw std::invalid_argument("omega_r must be finite and >= 0");
    if (!std::isfinite(params.delta))
        throw std::invalid_argument("delta must be finite");
    if (const auto* gauss = std::get_if<GaussianField>(&params.profile)) {
        if (!std::isfinite(gauss->sigma_tau) || gauss->sigma_tau <= 0.0)
            throw std::invalid_argument("sigma_tau must be finite and > 0");
    }
}

StateDeriv derivatives(const AtomState& state, const SimParams& params, double tau) {
    validate(params);
    if (!finite(state)) throw std::invalid_argument("non-finite state");
    const double w = field_amplitude(params.profile, tau);
    const double c = std::cos(state.x);
    constexpr Complex i{0.0, 1.0};
    StateDeriv d;
    d.dx = params.omega_r * state.p;
    d.dp = w * interaction_energy(state) * std::sin(state.x);
    d.dg = i * w * state.G * c;
    d.dG = -i * params.delta * state.G + i * w * state.g * c;
    return d;
}

double energy(const AtomState& state, const SimParams& params) {
    return 0.5 * params.omega_r * state.p * state.p +
           interaction_energy(state) * std::cos(state.x) -
           0.5 * params.delta * (std::norm(state.G) - std::norm(state.g));
}

double interaction_energy(const AtomState& state) {
    return 2.0 * (state.g.real() * state.G.real() + state.g.imag() * state.G.imag());
}

Trajectory integrate(const AtomState& state0, const SimParams& params,
                     double tau_end, const IntegratorOptions& opts) {
    validate(params);
    if (!finite(state0)) throw std::invalid_argument("non-finite initial state");
    if (!std::isfinite(tau_end) || tau_end <= 0.0)
        throw std::invalid_argument("tau_end must be finite and > 0");
    if (opts.abs_tol <= 0.0 || opts.rel_tol <= 0.0 || opts.sample_dt <= 0.0)
        throw std::invalid_argument("integrator options must be positive");
    if (std::abs(state0.norm_sq() - 1.0) > opts.initial_norm_tol)
        throw std::invalid_argument("initial state violates |g|^2 + |G|^2 = 1");

    Trajectory traj;
    traj.h_monitored = params.constant_profile();

    const double h0 = energy(state0, params);
    auto record = [&](double tau, const State6& y) {
        const AtomState s = AtomState::from_array(y);
        const double h = energy(s, params);
        const double nrm = s.norm_sq();
        traj.tau.push_back(tau);
        traj.states.push_back(s);
        traj.H.push_back(h);
        traj.norm.push_back(nrm);
        traj.u.push_back(interaction_energy(s));
        traj.norm_drift = std::max(traj.norm_drift, std::abs(nrm - 1.0));
        if (traj.h_monitored) traj.h_drift = std::max(traj.h_drift, std::abs(h - h0));
        const double worst = traj.h_monitored ? std::max(traj.norm_drift, traj.h_drift)
                                              : traj.norm_drift;
        if (worst > opts.drift_abort)
            throw integration_error("invariant drift " + std::to_string(worst) +
                                    " exceeds abort threshold at tau=" + std::to_string(tau));
    };

    MainSystem system{params};
    State6 y = state0.to_array();
    record(0.0, y);

    auto stepper = detail::make_stepper<State6>(opts.abs_tol, opts.rel_tol);
    double dt = std::min({0.1, opts.sample_dt, tau_end});
    double t_prev = 0.0;
    for (std::size_t k = 1; t_prev < tau_end; ++k) {
        const double ts = std::min(static_cast<double>(k) * opts.sample_dt, tau_end);
        detail::advance_clamped(stepper, system, y, t_prev, ts, dt, opts.min_step);
        record(ts, y);
        if (opts.renormalize) {
            const double nrm = std::sqrt(std::norm(Complex{y[2], y[3]}) +
                                         std::norm(Complex{y[4], y[5]}));
            for (int j = 2; j < 6; ++j) y[j] /= nrm;
        }
        t_prev = ts;
    }
    return traj;
}

InitialRegime initial_regime_estimate(const AtomState& state0, const SimParams& params) {
    validate(params);
    if (!finite(state0)) throw std::invalid_argument("non-finite state");
    const double k0 = 0.5 * params.omega_r * state0.p * state0.p;
    const double h0 = k0 + interaction_energy(state0) * std::cos(state0.x);
    if (h0 < 0.0) return InitialRegime::Trapped;
    if (k0 > 1.0) return InitialRegime::Ballistic;
    return InitialRegime::Walking;
}

const char* to_string(InitialRegime regime) {
    switch (regime) {
        case InitialRegime::Ballistic: return "ballistic";
        case InitialRegime::Walking: return "walking";
        case InitialRegime::Trapped: return "trapped";
    }
    return "?";
}

AtomState resonance_solution(double p0, double omega_r, double tau) {
    const double a = omega_r * p0;
    const double theta = (a == 0.0) ? tau : std::sin(a * tau) / a;
    AtomState s;
    s.x = a * tau;
    s.p = p0;
    s.g = Complex{std::cos(theta), 0.0};
    s.G = Complex{0.0, std::sin(theta)};
    return s;
}

GroupPair frozen_rabi_solution(double x0, double delta, double tau) {
    const double c = std::cos(x0);
    const double w = std::sqrt(0.25 * delta * delta + c * c);
    GroupPair out;
    if (w == 0.0) return out;  // no coupling and no detuning: nothing moves
    const Complex rot = std::polar(1.0, -0.5 * delta * tau);
    out.g = rot * Complex{std::cos(w * tau), 0.5 * delta / w * std::sin(w * tau)};
    out.g_tilde = rot * Complex{0.0, c / w * std::sin(w * tau)};
    return out;
}

double frozen_rabi_excited_population(double x0, double delta, double tau) {
    const double c2 = std::cos(x0) * std::cos(x0);
    const double w2 = 0.25 * delta * delta + c2;
    if (w2 == 0.0) return 0.0;
    const double s = std::sin(std::sqrt(w2) * tau);
    return c2 / w2 * s * s;
}

} // namespace atomsim
