#include "doctest.h"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "atomsim/dynamics.hpp"
#include "support/reference.hpp"

using namespace atomsim;

namespace {

constexpr double kPi = std::numbers::pi;

double state_dist(const AtomState& a, const AtomState& b) {
    const auto ya = a.to_array();
    const auto yb = b.to_array();
    double m = 0.0;
    for (int k = 0; k < 6; ++k) m = std::max(m, std::abs(ya[k] - yb[k]));
    return m;
}

AtomState random_normalized_state(std::mt19937_64& gen) {
    std::normal_distribution<double> n01;
    double v[4] = {n01(gen), n01(gen), n01(gen), n01(gen)};
    const double r = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]);
    std::uniform_real_distribution<double> xdist(-1.5, 1.5), pdist(-20.0, 20.0);
    return {xdist(gen), pdist(gen), {v[0] / r, v[1] / r}, {v[2] / r, v[3] / r}};
}

const SimParams kFig2RF{1e-3, 0.8, ConstantField{}};
const SimParams kFig2CF{1e-3, 0.2, ConstantField{}};
const SimParams kFig2CW{1e-3, 0.2, ConstantField{}};
const SimParams kFig2T{1e-3, -0.2, ConstantField{}};

} // namespace

TEST_CASE("derivatives: ground state at an antinode") {
    const SimParams params{1e-3, 0.2};
    const auto d = derivatives(AtomState::ground(0.0, 10.0), params, 0.0);
    CHECK(d.dx == doctest::Approx(0.01).epsilon(1e-14));
    CHECK(d.dp == 0.0);
    CHECK(std::abs(d.dg) == 0.0);
    CHECK(std::abs(d.dG - Complex{0.0, 1.0}) < 1e-15);
}

TEST_CASE("derivatives: coupling vanishes at a node") {
    const SimParams params{1e-3, 0.7};
    const AtomState s{0.5 * kPi, 3.0, {0.6, 0.2}, {0.4, std::sqrt(1.0 - 0.36 - 0.04 - 0.16)}};
    const auto d = derivatives(s, params, 0.0);
    CHECK(std::abs(d.dg) < 1e-15);
    CHECK(std::abs(d.dG - Complex{0.0, -1.0} * params.delta * s.G) < 1e-15);
}

TEST_CASE("derivatives: Gaussian beam center equals the constant profile") {
    const double sigma = 400.0;
    const SimParams gauss{1e-3, 0.2, GaussianField{sigma}};
    const SimParams constant{1e-3, 0.2};
    const AtomState s{1.1, -7.0, {0.3, 0.5}, {0.4, std::sqrt(1.0 - 0.09 - 0.25 - 0.16)}};
    const auto dg = derivatives(s, gauss, 1.5 * sigma);
    const auto dc = derivatives(s, constant, 0.0);
    CHECK(dg.dx == dc.dx);
    CHECK(dg.dp == doctest::Approx(dc.dp).epsilon(1e-14));
    CHECK(std::abs(dg.dg - dc.dg) < 1e-15);
    CHECK(std::abs(dg.dG - dc.dG) < 1e-15);
    // off-center the coupling terms scale by the envelope, detuning term not
    const double tau = sigma;  // envelope exp(-1/4)
    const double w = field_amplitude(gauss.profile, tau);
    CHECK(w == doctest::Approx(std::exp(-0.25)).epsilon(1e-14));
    const auto doff = derivatives(s, gauss, tau);
    CHECK(doff.dp == doctest::Approx(w * dc.dp).epsilon(1e-13));
    CHECK(std::abs(doff.dg - w * dc.dg) < 1e-15);
    CHECK(std::abs(doff.dG - (Complex{0.0, -1.0} * gauss.delta * s.G +
                              w * (dc.dG - Complex{0.0, -1.0} * gauss.delta * s.G))) < 1e-15);
}

TEST_CASE("energy: direct substitutions") {
    CHECK(energy(AtomState::ground(0.0, 10.0), {1e-3, 0.2}) ==
          doctest::Approx(0.15).epsilon(1e-14));
    CHECK(std::abs(energy(AtomState::ground(0.5 * kPi, 0.0), {1e-3, 0.0})) < 1e-15);
    // H0 < 0 at negative detuning: the trapping condition
    CHECK(energy(AtomState::ground(0.0, 0.0), {1e-3, -0.2}) ==
          doctest::Approx(-0.1).epsilon(1e-14));
}

TEST_CASE("interaction energy: bounds and extremes") {
    CHECK(interaction_energy(AtomState::ground(0.0, 0.0)) == 0.0);
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(interaction_energy({0.0, 0.0, {r, 0.0}, {r, 0.0}}) ==
          doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("integrate: resonance closed form at tau = 1000") {
    const SimParams params{1e-3, 0.0};
    const auto traj = integrate(AtomState::ground(0.0, 10.0), params, 1000.0);
    double max_err = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k)
        max_err = std::max(max_err,
                           state_dist(traj.states[k], resonance_solution(10.0, 1e-3, traj.tau[k])));
    CHECK(max_err < 1e-6);
    // u vanishes identically on the resonant ground-start trajectory
    double max_u = 0.0;
    for (double u : traj.u) max_u = std::max(max_u, std::abs(u));
    CHECK(max_u < 1e-8);
}

TEST_CASE("integrate: frozen-position Rabi oscillations at omega_r = 0") {
    for (double x0 : {0.0, 1.0}) {
        for (double delta : {0.0, 0.5, 2.0}) {
            const SimParams params{0.0, delta};
            const auto traj = integrate(AtomState::ground(x0, 0.0), params, 100.0,
                                        {.abs_tol = 1e-12, .rel_tol = 1e-12});
            double max_err = 0.0, max_state_err = 0.0;
            for (std::size_t k = 0; k < traj.size(); ++k) {
                const double pop = frozen_rabi_excited_population(x0, delta, traj.tau[k]);
                max_err = std::max(max_err, std::abs(std::norm(traj.states[k].G) - pop));
                const auto exact = frozen_rabi_solution(x0, delta, traj.tau[k]);
                max_state_err = std::max(
                    {max_state_err, std::abs(traj.states[k].g - exact.g),
                     std::abs(traj.states[k].G - exact.g_tilde)});
            }
            CHECK(max_err < 1e-8);
            CHECK(max_state_err < 1e-8);
        }
    }
}

TEST_CASE("frozen-position closed form agrees with a raw RK4 run") {
    // validates the oracle itself on an independent integrator
    const double x0 = 1.0, delta = 0.5;
    using S = std::array<double, 6>;
    const SimParams params{0.0, delta};
    auto rhs = [&](const S& y, S& d, double tau) {
        const auto sd = derivatives(AtomState::from_array(y), params, tau);
        d = {sd.dx, sd.dp, sd.dg.real(), sd.dg.imag(), sd.dG.real(), sd.dG.imag()};
    };
    const auto y = testsupport::rk4_integrate<6>(
        rhs, AtomState::ground(x0, 0.0).to_array(), 0.0, 20.0, 400000);
    const auto exact = frozen_rabi_solution(x0, delta, 20.0);
    CHECK(std::abs(Complex{y[2], y[3]} - exact.g) < 1e-9);
    CHECK(std::abs(Complex{y[4], y[5]} - exact.g_tilde) < 1e-9);
}

TEST_CASE("integrate: norm and energy drift within 100x tolerance") {
    const double tol = 1e-10;
    const std::pair<SimParams, double> cases[] = {
        {kFig2RF, 45.0}, {kFig2CF, 45.0}, {kFig2CW, 10.0}, {kFig2T, 5.0}};
    for (const auto& [params, p0] : cases) {
        const auto traj = integrate(AtomState::ground(0.0, p0), params, 300.0,
                                    {.abs_tol = tol, .rel_tol = tol});
        CHECK(traj.norm_drift < 100.0 * tol);
        REQUIRE(traj.h_monitored);
        CHECK(traj.h_drift < 100.0 * tol);
    }
}

TEST_CASE("integrate: u is an additional integral at resonance") {
    std::mt19937_64 gen(31);
    for (int rep = 0; rep < 5; ++rep) {
        const auto s0 = random_normalized_state(gen);
        const SimParams params{1e-3, 0.0};
        const auto traj = integrate(s0, params, 500.0);
        const double u0 = traj.u.front();
        double drift = 0.0;
        for (double u : traj.u) drift = std::max(drift, std::abs(u - u0));
        CHECK(drift < 1e-8);
    }
}

TEST_CASE("integrate: |u| <= 1 along trajectories") {
    const auto traj = integrate(AtomState::ground(0.0, 10.0), kFig2CW, 500.0);
    for (double u : traj.u) CHECK(std::abs(u) <= 1.0 + 1e-12);
}

TEST_CASE("integrate: second-order form of the center-of-mass motion") {
    // finite-difference x'' against 2 omega_r (g1 G1 + g2 G2) sin x
    const auto traj = integrate(AtomState::ground(0.0, 5.0), kFig2T, 50.0,
                                {.abs_tol = 1e-12, .rel_tol = 1e-12, .sample_dt = 0.01});
    double max_err = 0.0;
    for (std::size_t k = 1; k + 1 < traj.size(); ++k) {
        const double h = traj.tau[k] - traj.tau[k - 1];
        const double xdd = (traj.states[k + 1].x - 2.0 * traj.states[k].x +
                            traj.states[k - 1].x) / (h * h);
        const auto& s = traj.states[k];
        const double rhs = 2.0 * 1e-3 *
                           (s.g.real() * s.G.real() + s.g.imag() * s.G.imag()) *
                           std::sin(s.x);
        max_err = std::max(max_err, std::abs(xdd - rhs));
    }
    CHECK(max_err < 1e-6);
}

TEST_CASE("integrate: self-consistency across tolerances") {
    // 1e-10 and 1e-8 runs agree at the endpoint; chaotic cases only over
    // tau <= 200 where shadowing permits
    const std::tuple<SimParams, double, double> cases[] = {
        {kFig2RF, 45.0, 1000.0},
        {kFig2T, 5.0, 1000.0},
        {kFig2CF, 45.0, 200.0},
        {kFig2CW, 10.0, 200.0}};
    for (const auto& [params, p0, tau_end] : cases) {
        const auto tight = integrate(AtomState::ground(0.0, p0), params, tau_end,
                                     {.abs_tol = 1e-10, .rel_tol = 1e-10});
        const auto loose = integrate(AtomState::ground(0.0, p0), params, tau_end,
                                     {.abs_tol = 1e-8, .rel_tol = 1e-8});
        CHECK(state_dist(tight.states.back(), loose.states.back()) < 1e-5);
    }
}

TEST_CASE("integrate: Gaussian profile monitors norm only") {
    const SimParams params{1e-3, 0.2, GaussianField{400.0}};
    const auto traj = integrate(AtomState::ground(0.0, 10.0), params, 300.0);
    CHECK_FALSE(traj.h_monitored);
    CHECK(traj.norm_drift < 1e-8);
    CHECK(traj.H.size() == traj.size());  // energy still recorded per sample
}

TEST_CASE("integrate: sampling grid is uniform and strictly increasing") {
    const auto traj = integrate(AtomState::ground(0.0, 10.0), kFig2CW, 25.05,
                                {.sample_dt = 0.1});
    REQUIRE(traj.size() >= 2);
    for (std::size_t k = 1; k < traj.size(); ++k) CHECK(traj.tau[k] > traj.tau[k - 1]);
    CHECK(traj.tau.back() == doctest::Approx(25.05).epsilon(1e-12));
    // monitors recomputable from states
    for (std::size_t k = 0; k < traj.size(); k += 25) {
        CHECK(traj.H[k] == doctest::Approx(energy(traj.states[k], kFig2CW)).epsilon(1e-14));
        CHECK(traj.u[k] == doctest::Approx(interaction_energy(traj.states[k])).epsilon(1e-14));
        CHECK(traj.norm[k] == doctest::Approx(traj.states[k].norm_sq()).epsilon(1e-14));
    }
}

TEST_CASE("integrate: renormalization mode keeps the norm pinned") {
    const IntegratorOptions loose{
        .abs_tol = 1e-6, .rel_tol = 1e-6, .sample_dt = 20.0, .drift_abort = 1.0};
    IntegratorOptions renorm = loose;
    renorm.renormalize = true;
    const auto plain = integrate(AtomState::ground(0.0, 10.0), kFig2CW, 2000.0, loose);
    const auto pinned = integrate(AtomState::ground(0.0, 10.0), kFig2CW, 2000.0, renorm);
    // per-interval growth can never exceed the accumulated drift
    CHECK(pinned.norm_drift <= plain.norm_drift);
    CHECK(std::abs(pinned.norm.back() - 1.0) <= plain.norm_drift);
}

TEST_CASE("integrate: rejects invalid input and aborts on drift") {
    CHECK_THROWS_AS(integrate(AtomState::ground(0.0, 10.0), {-1.0, 0.0}, 10.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(integrate(AtomState::ground(0.0, 10.0), {1e-3, 0.0, GaussianField{0.0}}, 10.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(integrate({0.0, 0.0, {0.5, 0.0}, {0.0, 0.0}}, kFig2CW, 10.0),
                    std::invalid_argument);
    AtomState nan_state = AtomState::ground(0.0, 10.0);
    nan_state.x = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(integrate(nan_state, kFig2CW, 10.0), std::invalid_argument);
    // an unreachable drift threshold must trip the abort guard
    CHECK_THROWS_AS(integrate(AtomState::ground(0.0, 10.0), kFig2CW, 200.0,
                              {.drift_abort = 1e-17}),
                    integration_error);
}

TEST_CASE("initial regime estimate") {
    const SimParams params{1e-3, 0.05};
    CHECK(initial_regime_estimate(AtomState::ground(0.0, 45.0), params) ==
          InitialRegime::Ballistic);
    CHECK(initial_regime_estimate(AtomState::ground(0.0, 44.0), params) ==
          InitialRegime::Walking);
    CHECK(initial_regime_estimate(AtomState::ground(0.0, 10.0), params) ==
          InitialRegime::Walking);
    // trapping needs H0 < 0: a superposition with u0 < 0 at an antinode
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(initial_regime_estimate({0.0, 0.0, {r, 0.0}, {-r, 0.0}}, params) ==
          InitialRegime::Trapped);
    // threshold scales as sqrt(2 / omega_r)
    const SimParams faster{2e-3, 0.05};
    CHECK(initial_regime_estimate(AtomState::ground(0.0, 32.0), faster) ==
          InitialRegime::Ballistic);
    CHECK(initial_regime_estimate(AtomState::ground(0.0, 31.0), faster) ==
          InitialRegime::Walking);
}
