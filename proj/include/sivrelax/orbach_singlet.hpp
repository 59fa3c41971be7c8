#pragma once

// Orbach relaxation through a spin-singlet excited state.
//
// Each ground sublevel m couples to the singlet with an overlap amplitude
// t_m. At zero field these are t0_m; in a strong field at angle theta to the
// defect axis the sublevels are rotated and, after averaging over the
// azimuth, the squared overlaps mix through |d^1(theta)|^2. A spin flip
// m <-> m' takes two phonon steps through the singlet and proceeds at
// C |t_m|^2 |t_m'|^2 exp(-E_a/kT).

#include <array>

#include <Eigen/Dense>

#include "sivrelax/rate_matrix.hpp"
#include "sivrelax/spin_core.hpp"

namespace sivrelax {

/// Squared zero-field overlaps |t0_0|^2, |t0_+1|^2, |t0_-1|^2.
struct ZeroFieldOverlaps {
  double t0_sq = 1.0;
  double tp_sq = 1.0;
  double tm_sq = 1.0;

  /// |t0_0|^2 = 1 and |t0_+-1|^2 = 1/ratio^2 for ratio = |t0_0 / t0_+-1|.
  static ZeroFieldOverlaps from_ratio(double ratio);
};

/// Field-mixed squared overlaps, indexed m = -1, 0, +1.
struct OverlapTriple {
  std::array<double, 3> sq{};

  double minus() const { return sq[0]; }
  double zero() const { return sq[1]; }
  double plus() const { return sq[2]; }
  double total() const { return sq[0] + sq[1] + sq[2]; }
};

struct OrbachParams {
  double rate_coefficient_c = 1.0;   // 1/s
  double activation_energy = 16.8;   // meV
  double temperature = 30.0;         // K
  double zeeman_freq = 9.7;          // GHz

  double activation() const;  // exp(-E_a/kT)
};

void validate(const OrbachParams& p);

/// How the Boltzmann factor mu is split between the up and down rates.
///   symmetric:  rate m' -> m carries mu^((m - m')/2); the stationary state is
///               P_m proportional to mu^m, i.e. Boltzmann at (T, f).
///   as_printed: rate m' -> m carries mu^(m - m'); the stationary state is
///               P_m proportional to mu^(2m).
/// Both agree at mu = 1.
enum class BalanceConvention { symmetric, as_printed };

enum class Transition { minus_zero, zero_plus };

/// Small Wigner matrix d^1(beta), rows m' and columns m in (-1, 0, +1) order.
Eigen::Matrix3d wigner_d1(double beta);

/// Full D^1(alpha, beta, gamma) = exp(-i m' alpha) d^1_{m'm}(beta) exp(-i m gamma).
Matrix3c wigner_big_d1(double alpha, double beta, double gamma);

/// Azimuth-averaged |D^1_{m'm}(phi, theta, 0)|^2. Doubly stochastic.
Eigen::Matrix3d mixing_matrix(double theta);

OverlapTriple mixed_overlaps(const ZeroFieldOverlaps& zf, double theta);

/// mu = exp(h f / k T).
double boltzmann_factor(double zeeman_freq_ghz, double temperature_k);

/// Normalized stationary populations for the given convention.
Eigen::Vector3d boltzmann_populations(double mu,
                                      BalanceConvention conv = BalanceConvention::symmetric);

RateMatrix3 singlet_rate_matrix(const OverlapTriple& ov, const OrbachParams& p,
                                BalanceConvention conv = BalanceConvention::symmetric);

/// Closed-form T1_a, T1_b at mu = 1. Requires |t0_+1| = |t0_-1|.
RelaxationTimes relaxation_times_analytic(const ZeroFieldOverlaps& zf, double theta,
                                          const OrbachParams& p);

/// Leading behaviour for |t0_0| >> |t0_+-1|:
///   1/T1_a = 3/8 C |t0_0|^4 sin^2(2 theta) e^{-E_a/kT}
///   1/T1_b = 1/2 C |t0_0|^4 sin^2(theta)   e^{-E_a/kT}
RelaxationTimes relaxation_times_large_imbalance(const ZeroFieldOverlaps& zf, double theta,
                                                 const OrbachParams& p);

/// Hahn-echo T2 for one single-quantum transition: Orbach dephasing with full
/// coherence loss per excursion plus instantaneous and spectral diffusion.
/// Pass 0 for t2_id or t2_sd to drop that background.
RelaxTime t2_singlet(const ZeroFieldOverlaps& zf, double theta, const OrbachParams& p,
                     double t2_id, double t2_sd, Transition transition = Transition::zero_plus);

/// T1_a / T2 predicted by the singlet model (Orbach channel only).
double t1_t2_ratio(const ZeroFieldOverlaps& zf, double theta,
                   Transition transition = Transition::zero_plus);

}  // namespace sivrelax
