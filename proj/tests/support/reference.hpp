#pragma once

// Test-only oracles, independent of the library's integration path.

#include <array>
#include <complex>
#include <functional>
#include <vector>

namespace testsupport {

/// Plain fixed-step classic RK4 for an n-dimensional real system.
template <std::size_t N>
std::array<double, N> rk4_integrate(
    const std::function<void(const std::array<double, N>&, std::array<double, N>&, double)>& rhs,
    std::array<double, N> y, double t0, double t1, std::size_t steps) {
    const double h = (t1 - t0) / static_cast<double>(steps);
    std::array<double, N> k1, k2, k3, k4, tmp;
    for (std::size_t s = 0; s < steps; ++s) {
        const double t = t0 + h * static_cast<double>(s);
        rhs(y, k1, t);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
        rhs(tmp, k2, t + 0.5 * h);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
        rhs(tmp, k3, t + 0.5 * h);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * k3[i];
        rhs(tmp, k4, t + h);
        for (std::size_t i = 0; i < N; ++i)
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return y;
}

/// Constant-driving solution of the two-level evolution: Omega and omega_a
/// constant, g(0) = 1, g'(0) = 0.
inline std::complex<double> two_level_constant_g(double omega_abs, double omega_a, double t) {
    const double w = std::sqrt(0.25 * omega_a * omega_a + omega_abs * omega_abs);
    const std::complex<double> rot = std::polar(1.0, 0.5 * omega_a * t);
    return rot * std::complex<double>{std::cos(w * t), -0.5 * omega_a / w * std::sin(w * t)};
}

/// Explicit 2x2 evolution matrix: diag(e^{-i phi/2}, e^{i phi/2}) times the
/// unimodular pair matrix [[g, -gt*], [gt, g*]].
inline std::array<std::complex<double>, 4> uatom_product(
    std::complex<double> g, std::complex<double> gt, double phi) {
    const std::complex<double> dm = std::polar(1.0, -0.5 * phi);
    const std::complex<double> dp = std::polar(1.0, 0.5 * phi);
    return {dm * g, dm * (-std::conj(gt)), dp * gt, dp * std::conj(g)};
}

} // namespace testsupport
