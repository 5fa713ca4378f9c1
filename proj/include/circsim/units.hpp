#pragma once

// Unit conventions used throughout:
//   - internal atomic-structure quantities in atomic units (energies in hartree)
//   - public frequencies: GHz for absolute transition frequencies, kHz for
//     shifts / Rabi rates / detunings, MHz for natural linewidths
//   - time in microseconds
// The hartree -> Hz conversion appears only here.

namespace circsim {

inline constexpr double hartree_Hz  = 6.579683920e15;  // E_h/h
inline constexpr double hartree_kHz = hartree_Hz * 1e-3;

inline constexpr double kHz_per_GHz = 1e6;
inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

// phase accumulated by a cyclic frequency over a time interval
inline double cycles(double f_GHz, double t_us) { return f_GHz * t_us * 1e3; }

}  // namespace circsim
