#pragma once

#include <array>
#include <vector>

#include "atomsim/dynamics.hpp"

namespace atomsim {

/// Kinematic features of an integrated trajectory, used for regime labels.
struct TrajectoryFeatures {
    long node_crossings = 0;       // crossings of x = pi/2 + pi n
    long direction_reversals = 0;  // sign flips of p beyond the hysteresis band
    double max_excursion = 0.0;    // max |x|
    bool confined_to_first_well = false;  // |x| < pi/2 throughout
    double lambda = 0.0;
};

struct FeatureOptions {
    double p_hyst = 0.5;  // |p| must exceed this before a sign flip counts
};

/// Requires dense sampling: consecutive samples must never skip a node
/// (|dx| < pi), otherwise std::invalid_argument.
TrajectoryFeatures extract_features(const Trajectory& traj, double lambda,
                                    const FeatureOptions& opts = {});

/// Linear-interpolated times at which the trajectory crosses a node.
std::vector<double> node_crossing_times(const Trajectory& traj);

/// RF regular flight, CF chaotic flight, CW chaotic walking, T trapping;
/// CT is the exploratory label for chaotic oscillation inside one well.
enum class MotionRegime { RF, CF, CW, T, CT };

const char* to_string(MotionRegime regime);

/// Pure classification from features: trapped if confined to the first
/// well, otherwise chaotic iff lambda exceeds the threshold, with
/// reversals separating walking from flight.
MotionRegime classify(const TrajectoryFeatures& features, double lambda_threshold = 5e-3);

/// Projections of a trajectory on the (g1, g2) plane, truncated at each
/// mark, plus the fraction of occupied cells in a grid over the unit disk.
struct Portrait {
    std::vector<double> tau_marks;
    std::vector<std::vector<std::array<double, 2>>> point_sets;  // one set per mark
    std::vector<double> coverage;                                // occupied / disk cells
};

Portrait group_parameter_portrait(const Trajectory& traj,
                                  std::vector<double> tau_marks, int grid_n = 100);

/// Shifts of the local mean of u across node crossings versus the same
/// two-window statistic evaluated mid-flight between crossings. Chaotic
/// flight shows u stepping to a new level at every node while staying flat
/// in between.
struct UJumpStats {
    double max_shift_at_nodes = 0.0;
    double max_shift_off_nodes = 0.0;
    long crossings_measured = 0;
};

/// gap excludes the crossing region itself; width is the averaging window
/// on each side, so u is compared over [t-gap-width, t-gap] and
/// [t+gap, t+gap+width].
UJumpStats u_jump_stats(const Trajectory& traj, double gap = 2.0, double width = 6.0);

} // namespace atomsim
