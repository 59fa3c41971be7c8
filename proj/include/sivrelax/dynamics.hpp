#pragma once

// Population dynamics of the three ground sublevels under a rate matrix and
// synthetic decay curves built from it.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sivrelax/orbach_singlet.hpp"
#include "sivrelax/rate_matrix.hpp"

namespace sivrelax {

/// Occupation probabilities of m = -1, 0, +1.
struct PopulationState {
  Eigen::Vector3d p = Eigen::Vector3d(0.0, 1.0, 0.0);

  /// Throws std::invalid_argument unless entries are >= 0 and sum to 1 within 1e-12.
  void validate() const;
};

/// Times in seconds, strictly ascending; sigma is empty or matches in length.
struct DecayCurve {
  std::vector<double> times;
  std::vector<double> signal;
  std::vector<double> sigma;

  bool has_sigma() const { return !sigma.empty(); }
  void validate() const;
};

/// Small negative populations from round-off are clipped to zero. Anything
/// below this is reported on stderr before clipping.
inline constexpr double kNegativePopulationTol = 1e-12;

/// exp(R t) P0. Uses a symmetrized eigen-decomposition when R satisfies
/// detailed balance with a strictly positive stationary state, otherwise a
/// general complex eigen-decomposition, falling back to a scaled Pade
/// exponential when the eigenvectors are nearly dependent.
PopulationState propagate(const RateMatrix3& r, const PopulationState& p0, double t);

/// Equilibrium populations shifted by optical pumping: a fraction
/// `polarization` of the population is moved into m = 0.
Eigen::Vector3d polarized_populations(const Eigen::Vector3d& equilibrium, double polarization);

/// Level indices (into P) of a single-quantum transition.
std::pair<int, int> transition_levels(Transition t);

/// Inversion recovery: start from the optically polarized state with the
/// transition's two populations swapped; signal = P_lower - P_upper. The
/// equilibrium defaults to the stationary state of R (uniform if R has none).
DecayCurve inversion_recovery_curve(const RateMatrix3& r, Transition transition,
                                    double polarization, std::span<const double> times,
                                    std::optional<Eigen::Vector3d> equilibrium = std::nullopt);

/// Saturation recovery: same as inversion recovery but the pair is equalized
/// instead of swapped.
DecayCurve saturation_recovery_curve(const RateMatrix3& r, Transition transition,
                                     double polarization, std::span<const double> times,
                                     std::optional<Eigen::Vector3d> equilibrium = std::nullopt);

/// Gaussian noise with standard deviation relative_noise * max|signal|. The
/// per-point sigma is set to that value. Reproducible for a given seed.
DecayCurve synthesize_noisy(const DecayCurve& curve, double relative_noise, std::uint64_t seed);

/// n points log-spaced between t_min and t_max inclusive.
std::vector<double> log_spaced(double t_min, double t_max, int n);

}  // namespace sivrelax
