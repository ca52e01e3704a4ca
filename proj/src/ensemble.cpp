#include "atomsim/ensemble.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "atomsim/parallel.hpp"
#include "atomsim/rng.hpp"

namespace atomsim {

EnsembleResult run_ensemble(const EnsembleSpec& spec, unsigned jobs) {
    validate(spec.params);
    if (spec.n_atoms < 1) throw std::invalid_argument("n_atoms must be >= 1");
    if (spec.sigma_x < 0.0 || spec.sigma_p < 0.0)
        throw std::invalid_argument("sigmas must be >= 0");
    if (!std::isfinite(spec.x0_mean) || !std::isfinite(spec.p0_mean))
        throw std::invalid_argument("non-finite ensemble means");
    if (!std::isfinite(spec.tau_end) || spec.tau_end <= 0.0)
        throw std::invalid_argument("tau_end must be finite and > 0");

    EnsembleResult result;
    result.atoms.resize(spec.n_atoms);

    IntegratorOptions opts = spec.integ;
    opts.sample_dt = spec.tau_end;  // only the endpoint is needed

    parallel_for(spec.n_atoms, jobs, [&](std::size_t i) {
        auto& summary = result.atoms[i];
        summary.atom_id = i;
        const auto [zx, zp] = rng::normal_pair(spec.seed, i);
        summary.x0 = spec.x0_mean + spec.sigma_x * zx;
        summary.p0 = spec.p0_mean + spec.sigma_p * zp;
        try {
            const auto traj = integrate(AtomState::ground(summary.x0, summary.p0),
                                        spec.params, spec.tau_end, opts);
            summary.final_state = traj.states.back();
            summary.final_norm = traj.norm.back();
            summary.ok = true;
        } catch (const std::exception&) {
            summary.ok = false;
        }
    });

    for (const auto& a : result.atoms)
        if (!a.ok) ++result.failures;
    return result;
}

Histogram histogram(std::span<const double> values, double bin_width,
                    double lo, double hi) {
    if (values.empty()) throw std::invalid_argument("histogram input is empty");
    if (!(bin_width > 0.0)) throw std::invalid_argument("bin_width must be > 0");
    if (!(hi > lo)) throw std::invalid_argument("need hi > lo");

    Histogram h;
    h.bin_width = bin_width;
    h.lo = lo;
    h.hi = hi;
    const auto nbins = static_cast<std::size_t>(std::ceil((hi - lo) / bin_width - 1e-12));
    h.bin_left.resize(nbins);
    h.counts.assign(nbins, 0);
    for (std::size_t k = 0; k < nbins; ++k) h.bin_left[k] = lo + k * bin_width;

    for (double v : values) {
        if (!(v >= lo) || !(v < hi)) continue;  // also drops NaN
        auto k = static_cast<std::size_t>((v - lo) / bin_width);
        if (k >= nbins) k = nbins - 1;
        ++h.counts[k];
        ++h.in_range;
    }
    h.density.resize(nbins, 0.0);
    if (h.in_range > 0) {
        const double norm = 1.0 / (static_cast<double>(h.in_range) * bin_width);
        for (std::size_t k = 0; k < nbins; ++k)
            h.density[k] = static_cast<double>(h.counts[k]) * norm;
    }
    return h;
}

NormalizedParams normalize_physical(const PhysicalSetup& setup) {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(setup.wavelength) || !positive(setup.recoil_frequency) ||
        !positive(setup.rabi_frequency) || !positive(setup.beam_radius) ||
        !positive(setup.longitudinal_velocity))
        throw std::invalid_argument("physical setup values must be positive");

    // hbar k^2 / m = 2 * (2 pi nu_rec), Omega0 = 2 pi nu_Rabi
    NormalizedParams out;
    out.omega_r = 2.0 * setup.recoil_frequency / setup.rabi_frequency;
    const double omega0 = 2.0 * std::numbers::pi * setup.rabi_frequency;
    out.sigma_tau = setup.beam_radius * omega0 / setup.longitudinal_velocity;
    return out;
}

} // namespace atomsim
