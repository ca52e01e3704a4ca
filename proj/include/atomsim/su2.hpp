#pragma once

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "atomsim/errors.hpp"

namespace atomsim {

using Complex = std::complex<double>;

/// An SU(2) group element in the noncanonical chart: a pair of complex
/// parameters with |g|^2 + |g_tilde|^2 = 1.
struct GroupPair {
    Complex g{1.0, 0.0};
    Complex g_tilde{0.0, 0.0};

    double norm_sq() const { return std::norm(g) + std::norm(g_tilde); }
};

/// Secondary chart parameters recovered from g: the exponential-ordering
/// factors g_minus, g_plus and the logarithm g0 (principal branch,
/// g = exp(g0/2)).
struct ReconstructedParams {
    Complex g_minus{0.0, 0.0};
    Complex g_plus{0.0, 0.0};
    Complex g0{0.0, 0.0};
};

/// Driving of a two-level system: constant level splitting omega_a and a
/// complex amplitude Omega(t) in units of the maximal Rabi frequency.
/// Omega must not cross zero on the integration interval.
struct DrivingSpec {
    double omega_a = 0.0;
    std::function<Complex(double)> omega;
};

struct TwoLevelOptions {
    double tol = 1e-12;       // absolute and relative integrator tolerance
    double sample_dt = 0.01;  // uniform output grid spacing
};

/// Solution samples of the driven two-level problem. g_tilde is carried
/// along so the unit-norm constraint can be checked at every sample.
struct TwoLevelSeries {
    std::vector<double> t;
    std::vector<Complex> g;
    std::vector<Complex> dg;
    std::vector<Complex> g_tilde;
    double norm_drift = 0.0;  // max | |g|^2 + |g_tilde|^2 - 1 | over samples

    std::size_t size() const { return t.size(); }
    GroupPair pair_at(std::size_t k) const { return {g[k], g_tilde[k]}; }
};

/// Integrates the two-level evolution from the identity (g(0)=1, g'(0)=0)
/// up to t_end. The state advanced internally is the unit-norm pair
/// (g, g_tilde); dg/dt is recovered algebraically at the output samples, so
/// no derivative of Omega is ever needed.
TwoLevelSeries solve_two_level(const DrivingSpec& spec, double t_end,
                               const TwoLevelOptions& opts = {});

struct ReconstructOptions {
    double eps_g = 1e-6;  // |g| below this is treated as a chart singularity
};

/// Recovers (g_minus, g_plus, g0) along a solution series. g_minus and g0
/// come from closed formulas; g_plus is accumulated by quadrature of its
/// defining ODE on the sample grid. Throws parameterization_error when |g|
/// dips below eps_g anywhere on the series.
std::vector<ReconstructedParams> reconstruct_params(
    const TwoLevelSeries& series, const DrivingSpec& spec,
    const ReconstructOptions& opts = {});

/// Representation matrix of the group element (pair, phase) in the spin-j
/// irrep, j given as the doubled integer two_j >= 0. Rows and columns are
/// indexed by the weight m running from +j down to -j, which makes the
/// two_j == 1 case coincide entrywise with the explicit 2x2 evolution
/// matrix. phase is the accumulated level-splitting integral.
Eigen::MatrixXcd representation_matrix(int two_j, const GroupPair& pair,
                                       double phase, double norm_tol = 1e-8);

} // namespace atomsim
