#include "atomsim/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "atomsim/parallel.hpp"
#include "detail/stepping.hpp"

namespace atomsim {

namespace {

using State12 = std::array<double, 12>;

void main_rhs(const SimParams& params, const double* y, double* dydt, double tau) {
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

/// Trajectory plus the exact tangent flow: the deviation components evolve
/// with the analytic Jacobian of the equations of motion evaluated along
/// the carrier trajectory.
struct VariationalSystem {
    SimParams params;

    void operator()(const State12& y, State12& dydt, double tau) const {
        main_rhs(params, y.data(), dydt.data(), tau);

        const double w = field_amplitude(params.profile, tau);
        const double c = std::cos(y[0]);
        const double s = std::sin(y[0]);
        const double g1 = y[2], g2 = y[3], G1 = y[4], G2 = y[5];
        const double dx = y[6], dp = y[7], dg1 = y[8], dg2 = y[9], dG1 = y[10], dG2 = y[11];

        dydt[6] = params.omega_r * dp;
        dydt[7] = 2.0 * w * ((g1 * G1 + g2 * G2) * c * dx +
                             s * (G1 * dg1 + G2 * dg2 + g1 * dG1 + g2 * dG2));
        dydt[8] = w * (G2 * s * dx - c * dG2);
        dydt[9] = w * (-G1 * s * dx + c * dG1);
        dydt[10] = w * (g2 * s * dx - c * dg2) + params.delta * dG2;
        dydt[11] = w * (-g1 * s * dx + c * dg1) - params.delta * dG1;
    }
};

/// Two full copies of the system; the second carries the displaced twin.
struct TwinSystem {
    SimParams params;

    void operator()(const State12& y, State12& dydt, double tau) const {
        main_rhs(params, y.data(), dydt.data(), tau);
        main_rhs(params, y.data() + 6, dydt.data() + 6, tau);
    }
};

double tail_norm(const State12& y) {
    double s = 0.0;
    for (int k = 6; k < 12; ++k) s += y[k] * y[k];
    return std::sqrt(s);
}

} // namespace

LyapunovResult max_lyapunov(const AtomState& state0, const SimParams& params,
                            double tau_total, const LyapunovOptions& opts) {
    validate(params);
    if (!std::isfinite(tau_total) || tau_total <= 0.0)
        throw std::invalid_argument("tau_total must be finite and > 0");
    if (opts.renorm_interval <= 0.0 || opts.abs_tol <= 0.0 || opts.rel_tol <= 0.0)
        throw std::invalid_argument("lyapunov options must be positive");
    if (std::abs(state0.norm_sq() - 1.0) > 1e-6)
        throw std::invalid_argument("initial state violates |g|^2 + |G|^2 = 1");

    const bool variational = opts.method == LyapunovMethod::Variational;
    const auto base = state0.to_array();
    State12 y{};
    std::copy(base.begin(), base.end(), y.begin());

    // Deterministic generic start direction, equal weight on all coordinates.
    const double inv = 1.0 / std::sqrt(6.0);
    for (int k = 6; k < 12; ++k) y[k] = variational ? inv : base[k - 6] + opts.delta0 * inv;

    const auto n_intervals = static_cast<std::size_t>(
        std::ceil(tau_total / opts.renorm_interval - 1e-9));
    const std::size_t stride = std::max<std::size_t>(1, n_intervals / opts.max_series_points);

    LyapunovResult result;
    result.tau_total = tau_total;
    result.method = opts.method;

    auto stepper = detail::make_stepper<State12>(opts.abs_tol, opts.rel_tol);
    double dt = 0.1 * opts.renorm_interval;
    double log_sum = 0.0;

    VariationalSystem var_sys{params};
    TwinSystem twin_sys{params};

    for (std::size_t k = 1; k <= n_intervals; ++k) {
        const double t0 = (k - 1) * opts.renorm_interval;
        const double t1 = std::min(k * opts.renorm_interval, tau_total);
        if (variational)
            detail::advance_clamped(stepper, var_sys, y, t0, t1, dt);
        else
            detail::advance_clamped(stepper, twin_sys, y, t0, t1, dt);

        double stretch;
        if (variational) {
            stretch = tail_norm(y);
            for (int j = 6; j < 12; ++j) y[j] /= stretch;
        } else {
            double sep = 0.0;
            for (int j = 0; j < 6; ++j) {
                const double d = y[j + 6] - y[j];
                sep += d * d;
            }
            sep = std::sqrt(sep);
            stretch = sep / opts.delta0;
            const double shrink = opts.delta0 / sep;
            for (int j = 0; j < 6; ++j) y[j + 6] = y[j] + (y[j + 6] - y[j]) * shrink;
        }
        if (!(stretch > 0.0) || !std::isfinite(stretch))
            throw integration_error("degenerate tangent norm during renormalization");
        log_sum += std::log(stretch);

        if (k % stride == 0 || k == n_intervals)
            result.convergence_series.emplace_back(t1, log_sum / t1);
    }

    result.lambda = result.convergence_series.back().second;

    // Quarter-window means of the running estimate decide convergence; an
    // estimate already at the zero floor counts as converged-to-zero.
    if (std::abs(result.lambda) < opts.conv_abs_floor) {
        result.converged = true;
    } else {
        double q3 = 0.0, q4 = 0.0;
        std::size_t n3 = 0, n4 = 0;
        for (const auto& [t, lam] : result.convergence_series) {
            if (t > 0.75 * tau_total) {
                q4 += lam;
                ++n4;
            } else if (t > 0.5 * tau_total) {
                q3 += lam;
                ++n3;
            }
        }
        if (n3 > 0 && n4 > 0) {
            q3 /= static_cast<double>(n3);
            q4 /= static_cast<double>(n4);
            result.converged = std::abs(q4 - q3) < opts.conv_rel_tol * std::abs(q4);
        }
    }
    return result;
}

ChaosMap lyapunov_map(const std::vector<double>& delta_axis,
                      const std::vector<double>& p0_axis,
                      const SimParams& base_params, double tau_total,
                      const LyapunovOptions& opts, unsigned jobs) {
    if (delta_axis.empty() || p0_axis.empty())
        throw std::invalid_argument("map axes must be non-empty");
    if (!std::is_sorted(delta_axis.begin(), delta_axis.end()) ||
        !std::is_sorted(p0_axis.begin(), p0_axis.end()))
        throw std::invalid_argument("map axes must be ordered");

    ChaosMap map;
    map.delta_axis = delta_axis;
    map.p0_axis = p0_axis;
    map.params = base_params;
    map.tau_total = tau_total;
    map.method = opts.method;
    const std::size_t n = delta_axis.size() * p0_axis.size();
    map.lambda_grid.assign(n, std::numeric_limits<double>::quiet_NaN());
    map.converged_grid.assign(n, 0);

    parallel_for(n, jobs, [&](std::size_t idx) {
        const std::size_t i = idx / p0_axis.size();
        const std::size_t j = idx % p0_axis.size();
        SimParams cell = base_params;
        cell.delta = delta_axis[i];
        try {
            const auto r = max_lyapunov(AtomState::ground(0.0, p0_axis[j]), cell,
                                        tau_total, opts);
            map.lambda_grid[idx] = r.lambda;
            map.converged_grid[idx] = r.converged ? 1 : 0;
        } catch (const std::exception&) {
            // cell stays NaN; the sweep must not abort
        }
    });
    return map;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n < 2) throw std::invalid_argument("linspace needs n >= 2");
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k)
        v[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
    return v;
}

double predictability_time(double lambda, double dx_confidence, double dx0) {
    if (!(lambda > 0.0))
        throw std::domain_error("predictability time needs lambda > 0 (regular motion is unbounded)");
    if (!(dx0 > 0.0) || dx_confidence < dx0)
        throw std::domain_error("need dx_confidence >= dx0 > 0");
    return std::log(dx_confidence / dx0) / lambda;
}

} // namespace atomsim
