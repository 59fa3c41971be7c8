#pragma once

// Orbach relaxation through a spin-triplet excited state.
//
// Ground and excited manifolds share the g tensor and the applied field and
// differ only in their ZFS tensors. A phonon excursion is spin conserving, so
// the ground level m reaches excited level n with weight |<m|n>|^2 and
// returns to m' with weight |<n|m'>|^2. Relaxation comes entirely from the
// two eigenbases not coinciding.

#include <cstdint>
#include <span>

#include "sivrelax/orbach_singlet.hpp"
#include "sivrelax/rate_matrix.hpp"
#include "sivrelax/spin_core.hpp"

namespace sivrelax {

struct TripletModelParams {
  SpinSystemParams ground;      // ZFS, g tensor and field of the ground state
  ZfsTensor excited_zfs;        // only the ZFS differs in the excited state
  OrbachParams orbach;

  SpinSystemParams excited() const {
    SpinSystemParams e = ground;
    e.zfs = excited_zfs;
    return e;
  }
};

inline constexpr double kTripletDegeneracyTolGhz = 1e-6;

/// Within a degenerate eigenspace the sum over |<m|n><n|m'>|^2 depends on the
/// arbitrary basis the solver picked. `average` replaces it with the mean over
/// random unitary rotations of each degenerate subspace; `raw` keeps the
/// solver's basis.
enum class DegeneracyPolicy { average, raw };

inline constexpr int kDegenerateSamples = 64;

struct TripletOverlapTable {
  Eigen::Matrix3d table = Eigen::Matrix3d::Identity();     // O(m, n) = |<m_g|n_e>|^2
  Matrix3c amplitudes = Matrix3c::Identity();              // <m_g|n_e>
  Eigen::Matrix3d coupling = Eigen::Matrix3d::Identity();  // sum_n |<m|n><n|m'>|^2
  bool basis_sensitive = false;
  EigenSystem3 ground;
  EigenSystem3 excited;
};

TripletOverlapTable triplet_overlap_table(const TripletModelParams& p,
                                          DegeneracyPolicy policy = DegeneracyPolicy::average);

struct TripletRates {
  RateMatrix3 rates;
  bool basis_sensitive = false;
};

/// Ground levels are labelled m = -1, 0, +1 in ascending energy.
TripletRates triplet_rate_matrix(const TripletModelParams& p,
                                 DegeneracyPolicy policy = DegeneracyPolicy::average,
                                 BalanceConvention conv = BalanceConvention::symmetric);

RelaxationTimes triplet_relaxation_times(const TripletModelParams& p,
                                         DegeneracyPolicy policy = DegeneracyPolicy::average);

/// Coherence loss per excursion. Not a closed-form result; two explicit
/// choices are offered.
///
/// Each excursion (rate C e^{-E_a/kT}) multiplies the ground coherence
/// rho_{mm'} by F = sum_{n,n'} O(m,n) O(m',n') <exp(-i w_{nn'} tau)>, where
/// w_{nn'} is the excited-state precession frequency of the (n, n') pair
/// minus that of (m, m'), and tau is the dwell time in the excited state.
/// Then 1/T2 = C e^{-E_a/kT} (1 - Re F).
///   full_dephasing:    dwell long enough that only w = 0 terms survive.
///   partial_coherence: exponential dwell with mean `excited_lifetime`,
///                      <exp(-i w tau)> = 1 / (1 + i w tau_e).
struct TripletT2Model {
  enum class Kind { full_dephasing, partial_coherence };
  Kind kind = Kind::full_dephasing;
  double excited_lifetime = 0.0;  // s, partial_coherence only
};

RelaxTime triplet_t2_model(const TripletModelParams& p, Transition transition,
                           const TripletT2Model& model = {});

/// Rate coefficient C that best matches reference T1_a / T1_b curves in log
/// space, all other parameters fixed. Closed form: the mean log offset.
/// Angles where either curve is unbounded are skipped.
double calibrate_triplet_rate(const TripletModelParams& p, std::span<const double> thetas,
                              std::span<const RelaxationTimes> reference);

}  // namespace sivrelax
