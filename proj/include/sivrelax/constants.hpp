#pragma once

// Physical constants and unit conversions.
//
// Working units throughout the library: frequencies in GHz, magnetic fields
// in mT, temperatures in K, times in s, energies in meV. Everything that
// crosses between those units goes through this header.

#include <numbers>

namespace sivrelax {

namespace si {
inline constexpr double planck = 6.62607015e-34;           // J s (exact)
inline constexpr double reduced_planck = planck / (2.0 * std::numbers::pi);
inline constexpr double boltzmann = 1.380649e-23;          // J/K (exact)
inline constexpr double bohr_magneton = 9.2740100783e-24;  // J/T
inline constexpr double elementary_charge = 1.602176634e-19;  // C (exact)
inline constexpr double mu0_over_4pi = 1.00000000055e-7;   // N/A^2
}  // namespace si

struct PhysicalConstants {
  double bohr_magneton_over_h;  // GHz/mT
  double boltzmann_over_h;      // GHz/K
  double ev_to_joule;           // J/eV
  double mev_to_ghz;            // GHz/meV
  double mev_to_kelvin;         // K/meV

  static constexpr PhysicalConstants codata() {
    return PhysicalConstants{
        si::bohr_magneton / si::planck * 1e-3 * 1e-9,
        si::boltzmann / si::planck * 1e-9,
        si::elementary_charge,
        si::elementary_charge * 1e-3 / si::planck * 1e-9,
        si::elementary_charge * 1e-3 / si::boltzmann,
    };
  }
};

inline constexpr PhysicalConstants kConstants = PhysicalConstants::codata();

/// exp(-E_a / kT) with E_a in meV and T in K.
double activation_factor(double activation_energy_mev, double temperature_k);

/// h f / k in kelvin for a frequency in GHz.
double frequency_to_kelvin(double freq_ghz);

inline constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace sivrelax
