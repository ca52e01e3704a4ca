#pragma once

#include <stdexcept>
#include <string>

namespace atomsim {

/// The (g, g~) chart of the group is singular: |g| hit zero, or the driving
/// amplitude crossed zero so the chart can no longer be reconstructed.
class parameterization_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure during ODE integration (step-size underflow,
/// invariant drift beyond the configured abort threshold, ...).
class integration_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace atomsim
