#pragma once

namespace jtwpa::constants {

// Reduced flux quantum hbar/2e in Wb (CODATA 2018). All fluxes are stored in
// SI and all junction phases in radians; this is the only conversion factor.
inline constexpr double phi0 = 3.29105976e-16;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

}  // namespace jtwpa::constants
