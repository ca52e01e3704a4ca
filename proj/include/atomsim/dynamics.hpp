#pragma once

#include <array>
#include <complex>
#include <variant>
#include <vector>

#include "atomsim/errors.hpp"
#include "atomsim/su2.hpp"

namespace atomsim {

/// Coupled state of one atom: classical center of mass (x in units of the
/// inverse wave vector, p in photon momenta) and the two internal complex
/// amplitudes with |g|^2 + |G|^2 = 1.
struct AtomState {
    double x = 0.0;
    double p = 0.0;
    Complex g{1.0, 0.0};
    Complex G{0.0, 0.0};

    static AtomState ground(double x0, double p0) { return {x0, p0, {1.0, 0.0}, {0.0, 0.0}}; }

    double norm_sq() const { return std::norm(g) + std::norm(G); }

    std::array<double, 6> to_array() const {
        return {x, p, g.real(), g.imag(), G.real(), G.imag()};
    }
    static AtomState from_array(const std::array<double, 6>& y) {
        return {y[0], y[1], {y[2], y[3]}, {y[4], y[5]}};
    }
};

struct ConstantField {};
struct GaussianField {
    double sigma_tau = 400.0;  // normalized interaction time, > 0
};
using FieldProfile = std::variant<ConstantField, GaussianField>;

/// Control parameters: recoil frequency, detuning and the field envelope.
/// omega_r == 0 is the frozen-position test mode.
struct SimParams {
    double omega_r = 1e-3;
    double delta = 0.0;
    FieldProfile profile = ConstantField{};

    bool constant_profile() const { return std::holds_alternative<ConstantField>(profile); }
};

/// Envelope amplitude at time tau: 1 for the constant profile,
/// exp[-(tau - 3 sigma/2)^2 / sigma^2] for the Gaussian beam.
double field_amplitude(const FieldProfile& profile, double tau);

/// Throws std::invalid_argument on non-finite or out-of-range parameters.
void validate(const SimParams& params);

struct StateDeriv {
    double dx = 0.0;
    double dp = 0.0;
    Complex dg{0.0, 0.0};
    Complex dG{0.0, 0.0};
};

/// Right-hand side of the coupled translational/internal equations of
/// motion. The envelope multiplies only the field-coupling terms; the
/// detuning term in dG is left untouched.
StateDeriv derivatives(const AtomState& state, const SimParams& params, double tau);

/// Total energy: kinetic + u cos x - (delta/2)(|G|^2 - |g|^2).
/// Exactly conserved under the constant profile.
double energy(const AtomState& state, const SimParams& params);

/// The interaction-energy group parameter u = g G* + g* G (real, |u| <= 1).
/// The dipole expectation value is -u.
double interaction_energy(const AtomState& state);

struct IntegratorOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    double sample_dt = 0.1;      // uniform output sampling (dense output)
    double drift_abort = 1e-6;   // abort when a monitored invariant drifts past this
    bool renormalize = false;    // project (g, G) to unit norm at each sample
    double min_step = 1e-13;     // below this the integration is declared stuck
    double initial_norm_tol = 1e-6;
};

/// Time-ordered samples plus the monitored invariants.
struct Trajectory {
    std::vector<double> tau;
    std::vector<AtomState> states;
    std::vector<double> H;     // total energy at each sample
    std::vector<double> norm;  // |g|^2 + |G|^2 at each sample
    std::vector<double> u;     // interaction energy at each sample
    bool h_monitored = false;  // energy drift is meaningful (constant profile)
    double h_drift = 0.0;      // max |H - H(0)| over the run (constant profile)
    double norm_drift = 0.0;   // max |norm - 1| over the run

    std::size_t size() const { return tau.size(); }
};

/// Adaptive integration with dense-output sampling on a uniform grid
/// (plus the exact endpoint). Monitors the norm always and the energy for
/// the constant profile; throws integration_error when either drifts past
/// opts.drift_abort or the step size underflows.
Trajectory integrate(const AtomState& state0, const SimParams& params,
                     double tau_end, const IntegratorOptions& opts = {});

enum class InitialRegime { Ballistic, Walking, Trapped };

/// Small-detuning energy estimate: K0 = omega_r p0^2 / 2, H0 = K0 + u0 cos x0.
/// H0 < 0 traps the atom, K0 > 1 sends it over every potential hill.
InitialRegime initial_regime_estimate(const AtomState& state0, const SimParams& params);

const char* to_string(InitialRegime regime);

// Closed-form solutions used as oracles and by `simulate --check-analytic`.

/// Resonant (delta = 0) ground-start trajectory launched from x = 0:
/// p stays at p0, x = omega_r p0 tau, and the internal state rotates with
/// angle theta = sin(omega_r p0 tau) / (omega_r p0).
AtomState resonance_solution(double p0, double omega_r, double tau);

/// Frozen-position (omega_r = 0) internal state for a ground start at x0.
GroupPair frozen_rabi_solution(double x0, double delta, double tau);

/// Excited-state population of the frozen-position solution:
/// |G|^2 = (cos^2 x0 / w^2) sin^2(w tau), w = sqrt(delta^2/4 + cos^2 x0).
double frozen_rabi_excited_population(double x0, double delta, double tau);

} // namespace atomsim
