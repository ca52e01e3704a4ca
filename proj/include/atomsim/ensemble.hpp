#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "atomsim/dynamics.hpp"

namespace atomsim {

/// Monte Carlo ensemble: n_atoms ground-state atoms with Gaussian initial
/// position/momentum distributions, all integrated to tau_end.
struct EnsembleSpec {
    std::size_t n_atoms = 1;
    double x0_mean = 0.0;
    double p0_mean = 0.0;
    double sigma_x = 0.0;
    double sigma_p = 0.0;
    std::uint64_t seed = 0;
    SimParams params;
    double tau_end = 1000.0;
    IntegratorOptions integ;
};

struct AtomSummary {
    std::size_t atom_id = 0;
    double x0 = 0.0;
    double p0 = 0.0;
    AtomState final_state;
    double final_norm = 0.0;
    bool ok = false;
};

struct EnsembleResult {
    std::vector<AtomSummary> atoms;
    std::size_t failures = 0;
};

/// Initial conditions are drawn with the counter-based scheme keyed by
/// (seed, atom index, draw index); atoms integrate independently, so the
/// result is bitwise identical for any number of jobs. Per-atom failures
/// are recorded (ok = false) and excluded from the failure-free summaries.
EnsembleResult run_ensemble(const EnsembleSpec& spec, unsigned jobs = 1);

struct Histogram {
    double bin_width = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> bin_left;
    std::vector<std::size_t> counts;
    std::vector<double> density;  // normalized to unit integral over in-range mass
    std::size_t in_range = 0;
};

/// Left-closed right-open bins over [lo, hi). Rejects empty input.
Histogram histogram(std::span<const double> values, double bin_width,
                    double lo, double hi);

/// Laboratory parameters of the scattering experiment. rabi_frequency is
/// the maximal Rabi frequency divided by 2 pi (Hz), recoil_frequency the
/// recoil shift in Hz.
struct PhysicalSetup {
    double wavelength = 670.7e-9;
    double recoil_frequency = 63e3;
    double rabi_frequency = 126e6;
    double beam_radius = 5e-4;
    double longitudinal_velocity = 989.6;
};

struct NormalizedParams {
    double omega_r = 0.0;
    double sigma_tau = 0.0;
};

/// Dimensionless control parameters from laboratory units:
/// omega_r = 2 nu_rec / nu_Rabi and sigma_tau = r Omega0 / v_z.
NormalizedParams normalize_physical(const PhysicalSetup& setup);

} // namespace atomsim
