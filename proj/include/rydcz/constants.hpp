#pragma once

#include <numbers>

namespace rydcz {

/// CODATA 2018 values in SI units.
struct PhysicalConstants {
  static constexpr double hartree_energy = 4.3597447222071e-18;  // J
  static constexpr double rydberg_energy = hartree_energy / 2.0;  // J, infinite nuclear mass
  static constexpr double bohr_radius = 5.29177210903e-11;        // m
  static constexpr double elementary_charge = 1.602176634e-19;    // C
  static constexpr double vacuum_permittivity = 8.8541878128e-12; // F/m
  static constexpr double hbar = 1.054571817e-34;                 // J s
  static constexpr double planck = 6.62607015e-34;                // J s
  static constexpr double speed_of_light = 299792458.0;           // m/s
  static constexpr double boltzmann = 1.380649e-23;               // J/K
};

using consts = PhysicalConstants;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Cs-133 ground-state hyperfine splitting (defines the SI second).
inline constexpr double cs_clock_hz = 9'192'631'770.0;
inline constexpr double cs_clock_rad_s = two_pi * cs_clock_hz;

inline constexpr double to_hz(double angular_frequency) { return angular_frequency / two_pi; }
inline constexpr double to_rad_s(double hz) { return hz * two_pi; }

inline constexpr double micrometre = 1e-6;

}  // namespace rydcz
