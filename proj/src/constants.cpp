#include "sivrelax/constants.hpp"

#include <cmath>
#include <stdexcept>

namespace sivrelax {

double activation_factor(double activation_energy_mev, double temperature_k) {
  if (!(temperature_k > 0.0)) {
    throw std::invalid_argument("activation_factor: temperature must be positive");
  }
  return std::exp(-activation_energy_mev * kConstants.mev_to_kelvin / temperature_k);
}

double frequency_to_kelvin(double freq_ghz) {
  return freq_ghz / kConstants.boltzmann_over_h;
}

}  // namespace sivrelax
