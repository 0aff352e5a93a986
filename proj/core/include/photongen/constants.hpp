#pragma once

#include <numbers>

namespace photongen::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// CODATA 2018 exact / recommended values, SI.
inline constexpr double hbar = 1.054571817e-34;
inline constexpr double planck = two_pi * hbar;
inline constexpr double elementary_charge = 1.602176634e-19;
inline constexpr double boltzmann = 1.380649e-23;
inline constexpr double flux_quantum = planck / (2.0 * elementary_charge);

}  // namespace photongen::constants
