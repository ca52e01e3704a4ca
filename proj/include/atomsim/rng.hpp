#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace atomsim::rng {

// Counter-based draws: every number is a pure function of
// (seed, stream, counter), so parallel and serial runs agree bitwise.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t keyed_bits(std::uint64_t seed, std::uint64_t stream,
                                std::uint64_t counter) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ (stream + 0x9e3779b97f4a7c15ull));
    h = splitmix64(h ^ (counter + 0xd1b54a32d192ed03ull));
    return h;
}

/// Uniform draw in (0, 1].
inline double uniform_oc(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    return 1.0 - static_cast<double>(keyed_bits(seed, stream, counter) >> 11) * 0x1.0p-53;
}

/// Uniform draw in [0, 1).
inline double uniform_co(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    return static_cast<double>(keyed_bits(seed, stream, counter) >> 11) * 0x1.0p-53;
}

/// Standard-normal pair (Box-Muller) consuming counters (base, base+1).
inline std::pair<double, double> normal_pair(std::uint64_t seed, std::uint64_t stream,
                                             std::uint64_t counter_base = 0) {
    const double u1 = uniform_oc(seed, stream, counter_base);
    const double u2 = uniform_co(seed, stream, counter_base + 1);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
}

} // namespace atomsim::rng
