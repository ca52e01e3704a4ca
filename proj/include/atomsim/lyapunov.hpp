#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "atomsim/dynamics.hpp"

namespace atomsim {

enum class LyapunovMethod {
    Variational,    // exact tangent flow propagated alongside the trajectory
    TwoTrajectory,  // finite separation, renormalized back to delta0
};

struct LyapunovOptions {
    LyapunovMethod method = LyapunovMethod::Variational;
    double renorm_interval = 1.0;  // tangent renormalization spacing in tau
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    double conv_rel_tol = 0.05;    // quarter-window agreement for convergence
    double conv_abs_floor = 1e-3;  // |lambda| below this counts as converged-to-zero
    double delta0 = 1e-8;          // initial separation (two-trajectory method)
    std::size_t max_series_points = 2000;
};

struct LyapunovResult {
    double lambda = 0.0;
    double tau_total = 0.0;
    std::vector<std::pair<double, double>> convergence_series;  // (tau, running estimate)
    bool converged = false;
    LyapunovMethod method = LyapunovMethod::Variational;
};

/// Maximum Lyapunov exponent of the trajectory launched from state0:
/// mean log-stretch rate of a tangent (or finite-separation) vector in the
/// six real coordinates, renormalized every opts.renorm_interval.
LyapunovResult max_lyapunov(const AtomState& state0, const SimParams& params,
                            double tau_total, const LyapunovOptions& opts = {});

/// Grid of maximum Lyapunov exponents over detuning and initial momentum,
/// ground starts at x = 0. Stored row-major with the detuning index outer.
struct ChaosMap {
    std::vector<double> delta_axis;
    std::vector<double> p0_axis;
    std::vector<double> lambda_grid;    // NaN marks a failed cell
    std::vector<std::uint8_t> converged_grid;
    SimParams params;
    double tau_total = 0.0;
    LyapunovMethod method = LyapunovMethod::Variational;

    double lambda(std::size_t i_delta, std::size_t i_p0) const {
        return lambda_grid[i_delta * p0_axis.size() + i_p0];
    }
    bool converged(std::size_t i_delta, std::size_t i_p0) const {
        return converged_grid[i_delta * p0_axis.size() + i_p0] != 0;
    }
};

/// Per-cell failures are recorded as NaN and never abort the sweep. Cells
/// are computed independently and assembled by index, so the result does
/// not depend on the degree of parallelism.
ChaosMap lyapunov_map(const std::vector<double>& delta_axis,
                      const std::vector<double>& p0_axis,
                      const SimParams& base_params, double tau_total,
                      const LyapunovOptions& opts = {}, unsigned jobs = 1);

std::vector<double> linspace(double lo, double hi, std::size_t n);

/// Horizon (1/lambda) ln(dx/dx0) beyond which a position forecast with
/// initial error dx0 leaves the confidence interval dx. Domain error for
/// lambda <= 0 (regular motion has no finite horizon).
double predictability_time(double lambda, double dx_confidence, double dx0);

} // namespace atomsim
