#pragma once

// Internal integration helpers shared by the solvers.

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/numeric/odeint.hpp>

#include "atomsim/errors.hpp"

namespace atomsim::detail {

template <typename State>
auto make_stepper(double abs_tol, double rel_tol) {
    return boost::numeric::odeint::make_controlled(
        abs_tol, rel_tol, boost::numeric::odeint::runge_kutta_fehlberg78<State>());
}

/// Advances y from t_from to exactly t_to, carrying the adapted step size
/// across calls through dt. Throws integration_error when the controller
/// drives the step below min_step.
template <typename Stepper, typename System, typename State>
void advance_clamped(Stepper& stepper, const System& sys, State& y,
                     double t_from, double t_to, double& dt,
                     double min_step = 1e-13) {
    namespace odeint = boost::numeric::odeint;
    double t = t_from;
    while (t < t_to) {
        double trial = std::min(dt, t_to - t);
        const bool clamped = trial < dt;
        while (stepper.try_step(sys, y, t, trial) == odeint::fail) {
            if (trial < min_step)
                throw integration_error("step size underflow at tau=" + std::to_string(t));
        }
        // keep the controller's suggestion unless this step was clamped
        if (!clamped || trial > dt) dt = std::max(trial, min_step);
    }
}

} // namespace atomsim::detail
