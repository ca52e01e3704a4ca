#include "doctest.h"

#include <cmath>
#include <limits>

#include "atomsim/lyapunov.hpp"

using namespace atomsim;

namespace {

const SimParams kResonant{1e-3, 0.0};
const SimParams kCW{1e-3, 0.2};
const SimParams kTrapped{1e-3, -0.2};

// Converged reference from a tau = 1e6 variational run, frozen as a
// regression band (finite-time estimates wander a few percent).
constexpr double kLambdaCWRef = 0.0322;

} // namespace

TEST_CASE("predictability_time: closed formula and domain errors") {
    CHECK(predictability_time(0.01, std::exp(1.0), 1.0) == doctest::Approx(100.0));
    CHECK(predictability_time(0.5, 2.0, 2.0) == 0.0);
    CHECK(predictability_time(0.05, 1e6, 1.0) == doctest::Approx(std::log(1e6) / 0.05));
    CHECK(predictability_time(0.05, 1e6, 1.0) == doctest::Approx(276.31).epsilon(1e-3));
    CHECK_THROWS_AS(predictability_time(0.0, 10.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(predictability_time(-0.1, 10.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(predictability_time(0.1, 1.0, 2.0), std::domain_error);
    CHECK_THROWS_AS(predictability_time(0.1, 1.0, 0.0), std::domain_error);
}

TEST_CASE("max_lyapunov: regular cases stay at the zero floor") {
    for (double p0 : {5.0, 10.0, 45.0}) {
        const auto r = max_lyapunov(AtomState::ground(0.0, p0), kResonant, 2e4);
        CAPTURE(p0);
        CHECK(std::abs(r.lambda) < 2e-3);
        CHECK(r.converged);
    }
    const auto trapped = max_lyapunov(AtomState::ground(0.0, 5.0), kTrapped, 2e4);
    CHECK(std::abs(trapped.lambda) < 2e-3);
    // far off resonance or fast enough, ballistic flight is regular
    const auto far = max_lyapunov(AtomState::ground(0.0, 60.0), {1e-3, 0.9}, 2e4);
    CHECK(std::abs(far.lambda) < 5e-3);
    const auto fast = max_lyapunov(AtomState::ground(0.0, 70.0), {1e-3, 0.05}, 2e4);
    CHECK(std::abs(fast.lambda) < 5e-3);
}

TEST_CASE("max_lyapunov: chaotic walking is positive and reproduces the frozen value") {
    const auto r = max_lyapunov(AtomState::ground(0.0, 10.0), kCW, 2e4);
    CHECK(r.lambda > 0.0);
    CHECK(r.converged);
    CHECK(r.lambda > 0.8 * kLambdaCWRef);
    CHECK(r.lambda < 1.2 * kLambdaCWRef);
    const auto baseline = max_lyapunov(AtomState::ground(0.0, 10.0), kResonant, 2e4);
    CHECK(r.lambda > 10.0 * std::abs(baseline.lambda));
}

TEST_CASE("max_lyapunov: result bookkeeping invariants") {
    const auto r = max_lyapunov(AtomState::ground(0.0, 10.0), kCW, 500.0);
    REQUIRE_FALSE(r.convergence_series.empty());
    CHECK(r.lambda == r.convergence_series.back().second);
    CHECK(r.tau_total == 500.0);
    for (std::size_t k = 1; k < r.convergence_series.size(); ++k)
        CHECK(r.convergence_series[k].first > r.convergence_series[k - 1].first);
}

TEST_CASE("max_lyapunov: tangent and two-trajectory methods agree") {
    const auto var = max_lyapunov(AtomState::ground(0.0, 10.0), kCW, 2e4);
    LyapunovOptions tt;
    tt.method = LyapunovMethod::TwoTrajectory;
    const auto twin = max_lyapunov(AtomState::ground(0.0, 10.0), kCW, 2e4, tt);
    CHECK(twin.method == LyapunovMethod::TwoTrajectory);
    CHECK(std::abs(twin.lambda - var.lambda) < 0.25 * var.lambda);
}

TEST_CASE("max_lyapunov: estimate is stable under solver knobs") {
    const auto base = max_lyapunov(AtomState::ground(0.0, 10.0), kCW, 2e4);
    LyapunovOptions half;
    half.renorm_interval = 0.5;
    const auto r_half = max_lyapunov(AtomState::ground(0.0, 10.0), kCW, 2e4, half);
    CHECK(std::abs(r_half.lambda - base.lambda) < 0.1 * base.lambda);
    LyapunovOptions tight;
    tight.abs_tol = tight.rel_tol = 1e-12;
    const auto r_tight = max_lyapunov(AtomState::ground(0.0, 10.0), kCW, 2e4, tight);
    CHECK(std::abs(r_tight.lambda - base.lambda) < 0.1 * base.lambda);
}

TEST_CASE("max_lyapunov: finite-time estimate of a regular orbit decays like 1/tau") {
    const auto short_run = max_lyapunov(AtomState::ground(0.0, 5.0), kTrapped, 1e3);
    const auto long_run = max_lyapunov(AtomState::ground(0.0, 5.0), kTrapped, 1e4);
    const double ratio = long_run.lambda / short_run.lambda;
    CHECK(ratio > 0.03);  // 1/tau up to the log factor of the linear stretch
    CHECK(ratio < 0.4);
}

TEST_CASE("lyapunov_map: single cell equals a direct call") {
    const auto map = lyapunov_map({0.2}, {10.0}, kCW, 5e3);
    const auto direct = max_lyapunov(AtomState::ground(0.0, 10.0), kCW, 5e3);
    CHECK(map.lambda(0, 0) == direct.lambda);
    CHECK(map.converged(0, 0) == direct.converged);
}

TEST_CASE("lyapunov_map: resonant column is regular, parallel runs are bitwise equal") {
    const std::vector<double> deltas{-0.2, 0.0, 0.2};
    const std::vector<double> p0s{5.0, 10.0};
    const auto seq = lyapunov_map(deltas, p0s, {1e-3, 0.0}, 5e3, {}, 1);
    const auto par = lyapunov_map(deltas, p0s, {1e-3, 0.0}, 5e3, {}, 2);
    CHECK(seq.lambda_grid == par.lambda_grid);
    CHECK(seq.converged_grid == par.converged_grid);
    for (std::size_t j = 0; j < p0s.size(); ++j)
        CHECK(std::abs(seq.lambda(1, j)) < 5e-3);  // the delta = 0 column
}

TEST_CASE("lyapunov_map: a failing cell is recorded as NaN, the sweep survives") {
    const std::vector<double> p0s{10.0, std::numeric_limits<double>::quiet_NaN()};
    const auto map = lyapunov_map({0.2}, p0s, kCW, 200.0);
    CHECK(std::isfinite(map.lambda(0, 0)));
    CHECK(std::isnan(map.lambda(0, 1)));
    CHECK_FALSE(map.converged(0, 1));
    CHECK_THROWS_AS(lyapunov_map({}, {1.0}, kCW, 100.0), std::invalid_argument);
    CHECK_THROWS_AS(lyapunov_map({0.3, 0.1}, {1.0}, kCW, 100.0), std::invalid_argument);
}

TEST_CASE("linspace") {
    const auto v = linspace(-1.0, 1.0, 5);
    REQUIRE(v.size() == 5);
    CHECK(v.front() == -1.0);
    CHECK(v.back() == 1.0);
    CHECK(v[2] == doctest::Approx(0.0));
    CHECK_THROWS_AS(linspace(0.0, 1.0, 1), std::invalid_argument);
}
