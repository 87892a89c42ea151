#pragma once

#include <numbers>

namespace rydsim {

// All internal frequencies are angular (rad/us), all times are us.
// Configuration files quote driving/detuning/interaction strengths as
// "x MHz" meaning omega = 2*pi*x rad/us.

inline constexpr double two_pi = 2.0 * std::numbers::pi;

constexpr double mhz_to_rad_us(double f_mhz) { return two_pi * f_mhz; }

constexpr double rad_us_to_mhz(double w_rad_us) { return w_rad_us / two_pi; }

}  // namespace rydsim
