// units.hpp — unit conventions and physical constants
//
// Internal convention: hbar = 1, energies are angular frequencies in rad/fs,
// times are in fs.  Wavenumber inputs (cm^-1) convert through 2*pi*c.

#pragma once

#include <cmath>

namespace fourwave::units {

// speed of light in cm/fs
inline constexpr double c_cm_per_fs = 2.99792458e-5;

// Boltzmann constant in cm^-1 / K
inline constexpr double k_boltzmann_invcm = 0.695034800;

inline constexpr double two_pi = 6.283185307179586476925286766559;

// cm^-1 -> rad/fs
inline constexpr double wavenumber_to_angular(double invcm) {
    return two_pi * c_cm_per_fs * invcm;
}

// rad/fs -> cm^-1
inline constexpr double angular_to_wavenumber(double radfs) {
    return radfs / (two_pi * c_cm_per_fs);
}

// temperature in K -> inverse energy beta in internal units (fs/rad)
inline double beta_from_temperature(double kelvin) {
    return 1.0 / wavenumber_to_angular(k_boltzmann_invcm * kelvin);
}

// coth with an overflow guard: for x > 50 the value is 1 to < 1e-43
inline double coth_clamped(double x) {
    if (x > 50.0) return 1.0;
    return 1.0 / std::tanh(x);
}

} // namespace fourwave::units
