#include "atomsim/su2.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "detail/stepping.hpp"

namespace atomsim {

namespace {

using State4 = std::array<double, 4>;  // Re g, Im g, Re g_tilde, Im g_tilde

constexpr Complex kI{0.0, 1.0};

Complex eval_omega(const DrivingSpec& spec, double t) {
    const Complex w = spec.omega(t);
    if (!std::isfinite(w.real()) || !std::isfinite(w.imag()))
        throw std::invalid_argument("Omega(t) is not finite at t=" + std::to_string(t));
    if (std::abs(w) == 0.0)
        throw parameterization_error("Omega(t) vanishes at t=" + std::to_string(t));
    return w;
}

/// The pair evolves as g' = -i Omega e^{i phi} g_tilde,
/// g_tilde' = -i Omega* e^{-i phi} g with phi = omega_a t, which conserves
/// |g|^2 + |g_tilde|^2 exactly and carries no derivative of Omega.
struct PairSystem {
    const DrivingSpec& spec;

    void operator()(const State4& y, State4& dydt, double t) const {
        const Complex w = eval_omega(spec, t);
        const Complex phase = std::polar(1.0, spec.omega_a * t);
        const Complex g{y[0], y[1]};
        const Complex gt{y[2], y[3]};
        const Complex dg = -kI * w * phase * gt;
        const Complex dgt = -kI * std::conj(w * phase) * g;
        dydt = {dg.real(), dg.imag(), dgt.real(), dgt.imag()};
    }
};

// Detects Omega passing through zero between consecutive samples: a
// component sign flip while the other component also flips or stays
// negligible. Checked at the output grid, so pathological drivings that
// dart around zero between samples can escape it.
bool crosses_zero(Complex a, Complex b) {
    const bool re_flip = a.real() * b.real() < 0.0;
    const bool im_flip = a.imag() * b.imag() < 0.0;
    const double scale = std::max(std::abs(a), std::abs(b));
    const bool im_small = std::max(std::abs(a.imag()), std::abs(b.imag())) < 1e-12 * scale;
    const bool re_small = std::max(std::abs(a.real()), std::abs(b.real())) < 1e-12 * scale;
    return (re_flip && (im_flip || im_small)) || (im_flip && re_small);
}

// 170! is the largest factorial a double holds.
constexpr int kMaxFactorial = 170;

double factorial(int n) {
    static const auto table = [] {
        std::array<double, kMaxFactorial + 1> f{};
        f[0] = 1.0;
        for (int i = 1; i <= kMaxFactorial; ++i) f[i] = f[i - 1] * static_cast<double>(i);
        return f;
    }();
    return table[n];
}

Complex ipow(Complex base, int n) {
    if (n < 0) {
        base = 1.0 / base;
        n = -n;
    }
    Complex r{1.0, 0.0};
    while (n > 0) {
        if (n & 1) r *= base;
        base *= base;
        n >>= 1;
    }
    return r;
}

} // namespace

TwoLevelSeries solve_two_level(const DrivingSpec& spec, double t_end,
                               const TwoLevelOptions& opts) {
    if (!spec.omega) throw std::invalid_argument("DrivingSpec.omega is empty");
    if (!std::isfinite(spec.omega_a) || !std::isfinite(t_end) || t_end < 0.0)
        throw std::invalid_argument("non-finite driving parameters");
    if (opts.tol <= 0.0 || opts.sample_dt <= 0.0)
        throw std::invalid_argument("tolerances and sample_dt must be positive");

    TwoLevelSeries out;
    State4 y{1.0, 0.0, 0.0, 0.0};
    PairSystem system{spec};

    auto record = [&](double t, const State4& s) {
        const Complex w = eval_omega(spec, t);
        const Complex phase = std::polar(1.0, spec.omega_a * t);
        const Complex g{s[0], s[1]};
        const Complex gt{s[2], s[3]};
        if (!out.t.empty() && crosses_zero(spec.omega(out.t.back()), w))
            throw parameterization_error("Omega(t) crosses zero near t=" + std::to_string(t));
        out.t.push_back(t);
        out.g.push_back(g);
        out.dg.push_back(-kI * w * phase * gt);
        out.g_tilde.push_back(gt);
        out.norm_drift = std::max(out.norm_drift,
                                  std::abs(std::norm(g) + std::norm(gt) - 1.0));
    };

    record(0.0, y);
    if (t_end == 0.0) return out;

    auto stepper = detail::make_stepper<State4>(opts.tol, opts.tol);
    double dt = std::min(opts.sample_dt, t_end);
    double t_prev = 0.0;
    for (std::size_t k = 1; t_prev < t_end; ++k) {
        const double ts = std::min(static_cast<double>(k) * opts.sample_dt, t_end);
        detail::advance_clamped(stepper, system, y, t_prev, ts, dt);
        record(ts, y);
        t_prev = ts;
    }
    return out;
}

std::vector<ReconstructedParams> reconstruct_params(
    const TwoLevelSeries& series, const DrivingSpec& spec,
    const ReconstructOptions& opts) {
    if (series.size() == 0) throw std::invalid_argument("empty series");
    if (!spec.omega) throw std::invalid_argument("DrivingSpec.omega is empty");

    const std::size_t n = series.size();
    std::vector<ReconstructedParams> out(n);
    std::vector<Complex> integrand(n);

    for (std::size_t k = 0; k < n; ++k) {
        const Complex g = series.g[k];
        if (std::abs(g) <= opts.eps_g || (k > 0 && crosses_zero(series.g[k - 1], g)))
            throw parameterization_error(
                "|g| singular near t=" + std::to_string(series.t[k]) +
                ": g_plus reconstruction diverges");
        const Complex w = eval_omega(spec, series.t[k]);
        const Complex phase = std::polar(1.0, spec.omega_a * series.t[k]);
        out[k].g_minus = series.g_tilde[k] * g;
        out[k].g0 = 2.0 * std::log(g);
        integrand[k] = -kI * w * phase / (g * g);
    }

    // Cumulative quadrature of dg_plus/dt on the sample grid: three-point
    // (fourth-order) closed rules per interval, trapezoid when only two
    // samples exist.
    out[0].g_plus = Complex{0.0, 0.0};
    for (std::size_t k = 1; k < n; ++k) {
        const double h = series.t[k] - series.t[k - 1];
        Complex seg;
        if (n == 2) {
            seg = 0.5 * h * (integrand[0] + integrand[1]);
        } else if (k == 1) {
            seg = h / 12.0 * (5.0 * integrand[0] + 8.0 * integrand[1] - integrand[2]);
        } else {
            seg = h / 12.0 * (-integrand[k - 2] + 8.0 * integrand[k - 1] + 5.0 * integrand[k]);
        }
        out[k].g_plus = out[k - 1].g_plus + seg;
    }
    return out;
}

Eigen::MatrixXcd representation_matrix(int two_j, const GroupPair& pair,
                                       double phase, double norm_tol) {
    if (two_j < 0) throw std::invalid_argument("two_j must be >= 0");
    if (two_j > kMaxFactorial - 1)
        throw std::invalid_argument("representation too large for double factorials");
    if (std::abs(pair.norm_sq() - 1.0) > norm_tol)
        throw std::invalid_argument("group pair is not normalized");

    const int dim = two_j + 1;
    Eigen::MatrixXcd u(dim, dim);

    // Entries of the defining 2x2 matrix [[a, b], [c, d]].
    const Complex a = pair.g;
    const Complex b = -std::conj(pair.g_tilde);
    const Complex c_ = pair.g_tilde;
    const Complex d = std::conj(pair.g);

    // Polynomial (boson-realization) form of the spin-j matrix element:
    // algebraically identical to the factorial chart formula but free of
    // negative powers of g, so it stays accurate over the whole group.
    // Row r holds m' = j - r, column c holds m = j - c (weights descending),
    // the ordering under which the spin-1/2 case is the 2x2 matrix itself.
    for (int r = 0; r < dim; ++r) {
        const int two_mp = two_j - 2 * r;
        const int jp_mp = (two_j + two_mp) / 2;  // j + m'
        const int jm_mp = (two_j - two_mp) / 2;  // j - m'
        for (int col = 0; col < dim; ++col) {
            const int two_m = two_j - 2 * col;
            const int jp_m = (two_j + two_m) / 2;  // j + m
            const int jm_m = (two_j - two_m) / 2;  // j - m
            const double pref = std::sqrt(factorial(jp_mp) * factorial(jm_mp) /
                                          (factorial(jp_m) * factorial(jm_m)));

            const int m_sum = (two_m + two_mp) / 2;  // m + m' (integer)
            Complex sum{0.0, 0.0};
            for (int k = std::max(0, m_sum); k <= std::min(jp_m, jp_mp); ++k) {
                const double coeff =
                    factorial(jp_m) / (factorial(k) * factorial(jp_m - k)) *
                    factorial(jm_m) / (factorial(jp_mp - k) * factorial(jm_m - jp_mp + k));
                sum += coeff * ipow(a, k) * ipow(b, jp_mp - k) * ipow(c_, jp_m - k) *
                       ipow(d, k - m_sum);
            }
            u(r, col) = pref * std::polar(1.0, -0.5 * two_mp * phase) * sum;
        }
    }
    return u;
}

} // namespace atomsim
