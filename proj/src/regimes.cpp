#include "atomsim/regimes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace atomsim {

namespace {

constexpr double kPi = std::numbers::pi;

void require_dense(const Trajectory& traj) {
    if (traj.size() < 2) throw std::invalid_argument("trajectory too short");
    for (std::size_t k = 1; k < traj.size(); ++k) {
        if (std::abs(traj.states[k].x - traj.states[k - 1].x) >= kPi)
            throw std::invalid_argument(
                "under-sampled trajectory: a sample step skips a node");
    }
}

// Index of the node lattice x = pi/2 + pi n immediately below x.
double node_cell(double x) { return std::floor((x - 0.5 * kPi) / kPi); }

} // namespace

std::vector<double> node_crossing_times(const Trajectory& traj) {
    require_dense(traj);
    std::vector<double> times;
    for (std::size_t k = 1; k < traj.size(); ++k) {
        const double xa = traj.states[k - 1].x;
        const double xb = traj.states[k].x;
        const double ca = node_cell(xa);
        const double cb = node_cell(xb);
        if (ca == cb) continue;
        const double level = 0.5 * kPi + kPi * std::max(ca, cb);
        const double f = (level - xa) / (xb - xa);
        times.push_back(traj.tau[k - 1] + f * (traj.tau[k] - traj.tau[k - 1]));
    }
    return times;
}

TrajectoryFeatures extract_features(const Trajectory& traj, double lambda,
                                    const FeatureOptions& opts) {
    require_dense(traj);
    TrajectoryFeatures f;
    f.lambda = lambda;
    f.node_crossings = static_cast<long>(node_crossing_times(traj).size());

    bool confined = true;
    double max_x = 0.0;
    int armed = 0;
    for (const auto& s : traj.states) {
        max_x = std::max(max_x, std::abs(s.x));
        if (std::abs(s.x) >= 0.5 * kPi) confined = false;
        const int sign = s.p > opts.p_hyst ? 1 : (s.p < -opts.p_hyst ? -1 : 0);
        if (sign != 0) {
            if (armed != 0 && sign != armed) ++f.direction_reversals;
            armed = sign;
        }
    }
    f.max_excursion = max_x;
    f.confined_to_first_well = confined;
    return f;
}

const char* to_string(MotionRegime regime) {
    switch (regime) {
        case MotionRegime::RF: return "RF";
        case MotionRegime::CF: return "CF";
        case MotionRegime::CW: return "CW";
        case MotionRegime::T: return "T";
        case MotionRegime::CT: return "CT";
    }
    return "?";
}

MotionRegime classify(const TrajectoryFeatures& features, double lambda_threshold) {
    const bool chaotic = features.lambda > lambda_threshold;
    if (features.confined_to_first_well)
        return chaotic ? MotionRegime::CT : MotionRegime::T;
    if (chaotic)
        return features.direction_reversals > 0 ? MotionRegime::CW : MotionRegime::CF;
    // regular motion outside the first well: flight if it keeps passing
    // nodes, otherwise it sits in some other well
    return features.node_crossings > 0 ? MotionRegime::RF : MotionRegime::T;
}

Portrait group_parameter_portrait(const Trajectory& traj,
                                  std::vector<double> tau_marks, int grid_n) {
    if (tau_marks.empty()) throw std::invalid_argument("tau_marks must be non-empty");
    if (grid_n < 2) throw std::invalid_argument("grid_n must be >= 2");
    std::sort(tau_marks.begin(), tau_marks.end());
    if (traj.size() == 0 || traj.tau.back() + 1e-9 < tau_marks.back())
        throw std::invalid_argument("trajectory does not cover the last mark");

    Portrait portrait;
    portrait.tau_marks = tau_marks;

    // cells whose center lies inside the unit disk
    const double cell = 2.0 / grid_n;
    std::size_t disk_cells = 0;
    for (int a = 0; a < grid_n; ++a) {
        for (int b = 0; b < grid_n; ++b) {
            const double cx = -1.0 + (a + 0.5) * cell;
            const double cy = -1.0 + (b + 0.5) * cell;
            if (cx * cx + cy * cy <= 1.0) ++disk_cells;
        }
    }

    std::vector<char> occupied(static_cast<std::size_t>(grid_n) * grid_n, 0);
    std::size_t occupied_count = 0;
    std::size_t k = 0;
    for (double mark : tau_marks) {
        std::vector<std::array<double, 2>> points;
        if (!portrait.point_sets.empty()) points = portrait.point_sets.back();
        for (; k < traj.size() && traj.tau[k] <= mark + 1e-12; ++k) {
            const double g1 = traj.states[k].g.real();
            const double g2 = traj.states[k].g.imag();
            points.push_back({g1, g2});
            const int a = std::clamp(static_cast<int>((g1 + 1.0) / cell), 0, grid_n - 1);
            const int b = std::clamp(static_cast<int>((g2 + 1.0) / cell), 0, grid_n - 1);
            auto& slot = occupied[static_cast<std::size_t>(a) * grid_n + b];
            if (!slot) {
                slot = 1;
                ++occupied_count;
            }
        }
        portrait.point_sets.push_back(std::move(points));
        portrait.coverage.push_back(static_cast<double>(occupied_count) /
                                    static_cast<double>(disk_cells));
    }
    return portrait;
}

UJumpStats u_jump_stats(const Trajectory& traj, double gap, double width) {
    if (!(gap > 0.0) || !(width > 0.0))
        throw std::invalid_argument("gap and width must be > 0");
    const auto crossings = node_crossing_times(traj);
    UJumpStats stats;

    // mean of u over [t0, t1); NaN when the window holds no samples
    auto level = [&](double t0, double t1) {
        double sum = 0.0;
        std::size_t n = 0;
        const auto first = std::lower_bound(traj.tau.begin(), traj.tau.end(), t0);
        for (auto it = first; it != traj.tau.end() && *it < t1; ++it) {
            sum += traj.u[static_cast<std::size_t>(it - traj.tau.begin())];
            ++n;
        }
        return n ? sum / static_cast<double>(n)
                 : std::numeric_limits<double>::quiet_NaN();
    };
    auto shift_at = [&](double t) {
        const double before = level(t - gap - width, t - gap);
        const double after = level(t + gap, t + gap + width);
        return std::abs(after - before);  // NaN when a window is empty
    };

    const double reach = gap + width;
    for (std::size_t c = 0; c < crossings.size(); ++c) {
        const double t = crossings[c];
        // both windows must stay clear of the neighboring crossing regions
        const double prev_ok = c == 0 ? traj.tau.front() : crossings[c - 1];
        const double next_ok = c + 1 == crossings.size() ? traj.tau.back() : crossings[c + 1];
        if (t - reach < prev_ok || t + reach > next_ok) continue;
        const double s = shift_at(t);
        if (std::isfinite(s)) {
            stats.max_shift_at_nodes = std::max(stats.max_shift_at_nodes, s);
            ++stats.crossings_measured;
        }
        // reference statistic mid-flight, away from both crossings
        const double mid = 0.5 * (t + next_ok);
        if (mid - reach > t && mid + reach < next_ok) {
            const double s_off = shift_at(mid);
            if (std::isfinite(s_off))
                stats.max_shift_off_nodes = std::max(stats.max_shift_off_nodes, s_off);
        }
    }
    return stats;
}

} // namespace atomsim
