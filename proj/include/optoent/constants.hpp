#pragma once

#include <numbers>

namespace optoent::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// CODATA 2018 exact / recommended values, SI.
inline constexpr double hbar = 1.054571817e-34;
inline constexpr double k_boltzmann = 1.380649e-23;
inline constexpr double speed_of_light = 299792458.0;

}  // namespace optoent::constants
