#include "sivrelax/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <iostream>
#include <random>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace sivrelax {

void PopulationState::validate() const {
  if ((p.array() < 0.0).any() || std::abs(p.sum() - 1.0) > 1e-12) {
    throw std::invalid_argument("population state must be non-negative and sum to 1");
  }
}

void DecayCurve::validate() const {
  if (times.size() != signal.size() || (!sigma.empty() && sigma.size() != times.size())) {
    throw std::invalid_argument("decay curve columns differ in length");
  }
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) {
      throw std::invalid_argument("decay curve times must be strictly ascending");
    }
  }
}

namespace {

std::optional<Eigen::Matrix3d> symmetric_exponential(const RateMatrix3& r, double t) {
  const auto pi = stationary_distribution(r);
  if (!pi || (pi->array() <= 0.0).any()) return std::nullopt;
  const double scale = std::max(r.m.cwiseAbs().maxCoeff(), 1e-300);
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      const double flux_ij = r.m(i, j) * (*pi)(j);
      const double flux_ji = r.m(j, i) * (*pi)(i);
      if (std::abs(flux_ij - flux_ji) > 1e-10 * scale) return std::nullopt;
    }
  }
  const Eigen::Vector3d root = pi->cwiseSqrt();
  Eigen::Matrix3d s = root.cwiseInverse().asDiagonal() * r.m * root.asDiagonal();
  s = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(s);
  // A generator has no positive eigenvalues; anything above zero is round-off.
  const Eigen::Vector3d decay = (es.eigenvalues().array().min(0.0) * t).exp();
  const Eigen::Matrix3d v = es.eigenvectors();
  return root.asDiagonal() * v * decay.asDiagonal() * v.transpose() *
         root.cwiseInverse().asDiagonal();
}

Eigen::Matrix3d general_exponential(const RateMatrix3& r, double t) {
  Eigen::EigenSolver<Eigen::Matrix3d> es(r.m);
  if (es.info() == Eigen::Success) {
    const Eigen::Matrix3cd v = es.eigenvectors();
    Eigen::FullPivLU<Eigen::Matrix3cd> lu(v);
    if (lu.isInvertible() && lu.rcond() > 1e-10) {
      const Eigen::Vector3cd decay = (es.eigenvalues() * t).array().exp();
      return (v * decay.asDiagonal() * lu.inverse()).real();
    }
  }
  // Nearly defective: eigenvectors are unreliable, use scaling and squaring.
  const Eigen::Matrix3d rt = r.m * t;
  return rt.exp();
}

}  // namespace

PopulationState propagate(const RateMatrix3& r, const PopulationState& p0, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("propagate: t must be >= 0");
  if (t == 0.0) return p0;
  const auto sym = symmetric_exponential(r, t);
  const Eigen::Matrix3d e = sym ? *sym : general_exponential(r, t);
  Eigen::Vector3d p = e * p0.p;
  for (int k = 0; k < 3; ++k) {
    if (p(k) < -kNegativePopulationTol) {
      std::cerr << "warning: propagate clipped population " << p(k) << " to zero\n";
    }
    p(k) = std::max(p(k), 0.0);
  }
  return PopulationState{p / p.sum()};
}

Eigen::Vector3d polarized_populations(const Eigen::Vector3d& equilibrium, double polarization) {
  if (!(polarization >= 0.0 && polarization <= 1.0)) {
    throw std::invalid_argument("polarization must lie in [0, 1]");
  }
  return (1.0 - polarization) * equilibrium + polarization * Eigen::Vector3d(0.0, 1.0, 0.0);
}

std::pair<int, int> transition_levels(Transition t) {
  return t == Transition::zero_plus ? std::pair{1, 2} : std::pair{0, 1};
}

namespace {

enum class Preparation { invert, saturate };

DecayCurve recovery_curve(const RateMatrix3& r, Transition transition, double polarization,
                          std::span<const double> times, std::optional<Eigen::Vector3d> eq,
                          Preparation prep) {
  Eigen::Vector3d equilibrium;
  if (eq) {
    equilibrium = *eq / eq->sum();
  } else {
    const auto pi = stationary_distribution(r);
    equilibrium = pi ? *pi : Eigen::Vector3d::Constant(1.0 / 3.0);
  }
  Eigen::Vector3d start = polarized_populations(equilibrium, polarization);
  const auto [lo, hi] = transition_levels(transition);
  if (prep == Preparation::invert) {
    std::swap(start(lo), start(hi));
  } else {
    start(lo) = start(hi) = 0.5 * (start(lo) + start(hi));
  }

  DecayCurve out;
  out.times.assign(times.begin(), times.end());
  out.signal.reserve(times.size());
  const PopulationState p0{start};
  for (double t : times) {
    const PopulationState p = propagate(r, p0, t);
    out.signal.push_back(p.p(lo) - p.p(hi));
  }
  out.validate();
  return out;
}

}  // namespace

DecayCurve inversion_recovery_curve(const RateMatrix3& r, Transition transition,
                                    double polarization, std::span<const double> times,
                                    std::optional<Eigen::Vector3d> equilibrium) {
  return recovery_curve(r, transition, polarization, times, equilibrium, Preparation::invert);
}

DecayCurve saturation_recovery_curve(const RateMatrix3& r, Transition transition,
                                     double polarization, std::span<const double> times,
                                     std::optional<Eigen::Vector3d> equilibrium) {
  return recovery_curve(r, transition, polarization, times, equilibrium, Preparation::saturate);
}

DecayCurve synthesize_noisy(const DecayCurve& curve, double relative_noise, std::uint64_t seed) {
  if (!(relative_noise >= 0.0)) throw std::invalid_argument("relative_noise must be >= 0");
  DecayCurve out = curve;
  if (relative_noise == 0.0) return out;
  double peak = 0.0;
  for (double s : curve.signal) peak = std::max(peak, std::abs(s));
  const double sd = relative_noise * peak;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, sd > 0.0 ? sd : 1.0);
  for (double& s : out.signal) s += sd > 0.0 ? gauss(rng) : 0.0;
  out.sigma.assign(out.signal.size(), sd);
  return out;
}

std::vector<double> log_spaced(double t_min, double t_max, int n) {
  if (!(t_min > 0.0 && t_max > t_min) || n < 2) {
    throw std::invalid_argument("log_spaced: need 0 < t_min < t_max and n >= 2");
  }
  std::vector<double> out(n);
  const double a = std::log(t_min);
  const double step = (std::log(t_max) - a) / (n - 1);
  for (int k = 0; k < n; ++k) out[k] = std::exp(a + step * k);
  out.back() = t_max;
  return out;
}

}  // namespace sivrelax
