#pragma once

// Run configuration: every physical parameter, grid and I/O setting the
// subcommands read. Parsed from JSON or from a flat TOML subset; unknown keys
// are rejected.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sivrelax::cli {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ModelKind { singlet, triplet };

struct RunConfig {
  ModelKind model = ModelKind::singlet;

  // spin Hamiltonian
  double d_ground_ghz = 0.94;
  double g_parallel = 2.0042;
  double g_perpendicular = 2.0035;
  double microwave_ghz = 9.7;
  double field_mt = 0.0;  // 0: resonance field for g at each angle
  double misalignment_deg = 2.6;

  // Orbach process
  double activation_energy_mev = 16.8;
  double overlap_ratio = 125.0;
  std::optional<double> rate_coefficient;  // 1/s; derived when absent
  double temperature_k = 30.0;
  double t2_sd_s = 0.95e-3;
  double t2_id_s = 0.319e-3;
  bool include_backgrounds = true;
  std::string transition = "0<->+1";

  // triplet excited state
  double excited_d_ghz = 5.0;
  double excited_e_ghz = 0.0;
  double excited_axis_polar_deg = 0.0;
  std::optional<double> triplet_rate_coefficient;  // 1/s; calibrated when absent
  std::string triplet_t2_model = "full_dephasing";
  double excited_lifetime_s = 0.0;
  std::string degeneracy_policy = "average";

  // orientation sweep
  double theta_min_deg = 0.0;
  double theta_max_deg = 90.0;
  int theta_steps = 91;

  // temperature sweep
  double temperature_min_k = 5.0;
  double temperature_max_k = 60.0;
  int temperature_steps = 56;
  std::vector<std::string> orientation_labels{"[111]", "[-11-1]"};
  std::vector<double> t1_sat_s{46.0, 46.0};
  std::vector<double> t1_prefactor_hz{2.10e3, 378e3};
  std::vector<double> t2_sat_s{0.48e-3, 0.48e-3};
  std::vector<double> t2_prefactor_hz{1260e3, 1260e3};

  // decay synthesis
  double theta_deg = 35.0;
  double polarization = 0.115;
  std::string recovery = "inversion";
  double t_min_s = 1e-5;
  double t_max_s = 10.0;
  int points = 200;
  double relative_noise = 0.0;
  std::uint64_t seed = 1;

  // bath sweep
  std::vector<double> densities_cm3{5e15, 1.58e16, 5e16, 1.58e17, 5e17, 1.58e18, 5e18};
  std::vector<double> bath_temperatures_k{20.0, 25.0, 30.0, 35.0, 40.0};
  double bath_prefactor_hz = 378e3;
  double bath_t_sat_s = 46.0;
  double g1z = 2.0;
  double g2z = 2.0;
  std::string echo_form = "squared";

  // fitting
  std::string input;
  bool share_ea = true;
};

enum class ConfigFormat { json, toml };

/// Overlays the document's keys on a default RunConfig. Throws ConfigError on
/// syntax errors, unknown keys and type mismatches.
RunConfig parse_config(const std::string& text, ConfigFormat format);

/// Format from the extension (.json or .toml).
RunConfig load_config(const std::string& path);

/// Range and consistency checks. Throws ConfigError.
void validate(const RunConfig& c);

/// Every recognised key, in declaration order.
const std::vector<std::string>& config_keys();

}  // namespace sivrelax::cli
