#pragma once

// Fitters: exponential decays, Arrhenius temperature dependence with a shared
// activation energy, instantaneous-diffusion extrapolation, and the global
// orientation fit of the singlet-model overlap ratio.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sivrelax/dynamics.hpp"
#include "sivrelax/least_squares.hpp"
#include "sivrelax/orbach_singlet.hpp"

namespace sivrelax {

struct FitResult {
  std::string model;
  std::vector<std::string> names;
  Eigen::VectorXd values;
  Eigen::VectorXd sigmas;  // one-sigma, linearized; meaningful only if converged
  double rss = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> notices;
  std::map<std::string, double> extras;

  bool has(const std::string& name) const;
  double value(const std::string& name) const;
  double sigma(const std::string& name) const;
  /// Structured record; uncertainties are null when the fit did not converge.
  std::string to_json() const;
};

/// Thrown when a caller requires convergence and the optimizer did not get it.
struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- decays

/// a e^{-t/tau} + offset.
FitResult fit_monoexponential(const DecayCurve& curve);

/// a1 e^{-t/tau1} + a2 e^{-t/tau2} + offset with tau1 <= tau2. When the two
/// time constants are closer than a factor 1.5, or the information criterion
/// prefers one exponential, the single-exponential result is returned
/// (parameters a1, tau1, offset) with a notice.
FitResult fit_biexponential(const DecayCurve& curve);

inline constexpr double kBiexpMinSeparation = 1.5;

// ---------------------------------------------------------------- Arrhenius

struct ArrheniusPoint {
  double temperature = 0.0;  // K
  double time = 0.0;         // s
  double sigma = 0.0;        // s, 0 when unknown
};

struct ArrheniusDataset {
  std::string label;  // e.g. "D1 T1 [111]"
  std::vector<ArrheniusPoint> points;
  std::optional<double> fixed_t_sat;  // s

  void validate() const;
};

/// 1/T = 1/T_sat + A exp(-E_a/kT), A in 1/s.
double arrhenius_time(double t_sat, double prefactor, double activation_mev, double temperature);

struct ArrheniusFit {
  /// Shared mode: parameters E_a, then T_sat[label] and A[label] per dataset.
  /// Separate mode: empty names, see per_dataset.
  FitResult joint;
  std::vector<FitResult> per_dataset;  // E_a, T_sat, A for each dataset
};

ArrheniusFit fit_arrhenius(const std::vector<ArrheniusDataset>& datasets, bool share_ea = true);

// ---------------------------------------------------------------- instantaneous diffusion

struct EchoRatePoint {
  double theta2 = 0.0;  // rad, refocusing pulse angle
  double rate = 0.0;    // 1/s
};

/// 1/T2 = 1/T2_SD + sin^2(theta2/2) / T2_ID by linear least squares.
/// Parameters T2_SD and T2_ID in seconds.
FitResult fit_instantaneous_diffusion(const std::vector<EchoRatePoint>& points);

/// Hahn-echo T2 composed from the two channels at refocusing angle theta2.
double hahn_echo_t2(double t2_sd, double t2_id, double theta2);

// ---------------------------------------------------------------- orientation fit

struct OrientationPoint {
  double theta = 0.0;  // rad
  double time = 0.0;   // s
  double sigma = 0.0;  // s, 0 when unknown
};

struct OrientationData {
  std::vector<OrientationPoint> t1a;
  std::vector<OrientationPoint> t1b;
  std::vector<OrientationPoint> t2;
};

struct OrientationFitSettings {
  double activation_energy = 16.8;  // meV
  double temperature = 30.0;        // K
  double zeeman_freq = 9.7;         // GHz
  double t2_id = 0.0;               // s, 0 drops the channel
  double t2_sd = 0.0;
  Transition t2_transition = Transition::zero_plus;
  bool profile_lower_bound = true;
};

/// Singlet-model predictions (T1_a, T1_b from the full rate matrix, T2) at
/// coefficient K = C |t0_0|^4 with |t0_0| = 1.
RelaxationTimes singlet_model_times(double k, double ratio, double theta,
                                    const OrientationFitSettings& s);
RelaxTime singlet_model_t2(double k, double ratio, double theta, const OrientationFitSettings& s);

/// Joint fit in log-time space. Parameters K (1/s) and ratio. When requested,
/// extras["ratio_lower_bound"] holds the 95% profile-likelihood lower bound.
FitResult global_orientation_fit(const OrientationData& data, const OrientationFitSettings& s);

/// Profile of the residual sum over fixed ratios (K refit at each).
std::vector<std::pair<double, double>> orientation_profile(const OrientationData& data,
                                                           const OrientationFitSettings& s,
                                                           const std::vector<double>& ratios);

}  // namespace sivrelax
