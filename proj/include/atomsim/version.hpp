#pragma once

namespace atomsim {

inline constexpr const char* kVersion = "0.1.0";

} // namespace atomsim
