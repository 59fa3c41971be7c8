#pragma once

// Hahn-echo decay of a slow central spin dipolar-coupled to one partner that
// flips randomly at rate W, averaged over the pair orientation.

#include <span>
#include <utility>
#include <vector>

#include "sivrelax/dynamics.hpp"
#include "sivrelax/rate_matrix.hpp"

namespace sivrelax {

struct PairBathParams {
  double density = 1e16;                 // 1/cm^3
  double flip_rate = 0.0;                // 1/s
  double g1z = 2.0;
  double g2z = 2.0;
  double t2_sd_background = 0.95e-3;     // s, 0 drops the background

  void validate() const;
  /// n^{-1/3} in metres.
  double pair_distance() const;
};

/// Secular dipolar coupling in rad/s (SI, including mu0/4pi). r12 in metres.
double dipolar_coupling(double r12, double theta12, double g1z, double g2z);

/// `squared` uses sinh^2 in the second term; `as_printed` uses sinh to the
/// first power and keeps the real part. Only the squared form has V = 1 at
/// W = 0.
enum class EchoForm { squared, as_printed };

/// Echo amplitude V(2 tau) for coupling A (rad/s) and flip rate W (1/s).
double pair_echo_decay(double coupling, double flip_rate, double tau,
                       EchoForm form = EchoForm::squared);

/// Gauss-Legendre nodes and weights on [-1, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n);

inline constexpr int kAngularNodes = 64;

/// Orientation-averaged pair decay at each tau.
double averaged_pair_decay(const PairBathParams& p, double tau,
                           EchoForm form = EchoForm::squared);

/// Total echo V_avg(2 tau) * exp(-2 tau / T2_SD) sampled at each tau. The
/// curve's time column is the total echo time 2 tau.
DecayCurve averaged_echo_decay(const PairBathParams& p, std::span<const double> taus,
                               EchoForm form = EchoForm::squared);

struct BathT2 {
  RelaxTime t2 = RelaxTime::unbounded();  // echo time 2 tau at which the total hits 1/e
  bool non_monotone = false;              // total decay rose somewhere before the crossing
};

BathT2 bath_t2(const PairBathParams& p, EchoForm form = EchoForm::squared);

}  // namespace sivrelax
