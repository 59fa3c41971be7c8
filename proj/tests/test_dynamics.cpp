#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "sivrelax/constants.hpp"
#include "sivrelax/dynamics.hpp"

using namespace sivrelax;

namespace {

RateMatrix3 singlet_at(double theta_deg, double temperature = 30.0) {
  const OverlapTriple ov = mixed_overlaps(ZeroFieldOverlaps::from_ratio(125.0), deg_to_rad(theta_deg));
  return singlet_rate_matrix(ov, OrbachParams{6.4e5, 16.8, temperature, 9.7});
}

// Taylor series with scaling and squaring, independent of the library path.
Eigen::Matrix3d series_exp(const Eigen::Matrix3d& a) {
  int squarings = 0;
  double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  while (norm > 0.01) {
    norm /= 2;
    ++squarings;
  }
  const Eigen::Matrix3d x = a / std::pow(2.0, squarings);
  Eigen::Matrix3d sum = Eigen::Matrix3d::Identity(), term = Eigen::Matrix3d::Identity();
  for (int k = 1; k < 30; ++k) {
    term = term * x / k;
    sum += term;
  }
  for (int k = 0; k < squarings; ++k) sum = sum * sum;
  return sum;
}

}  // namespace

TEST_CASE("propagation at t = 0 returns the initial state") {
  const PopulationState p0{Eigen::Vector3d(0.2, 0.5, 0.3)};
  CHECK(propagate(singlet_at(40.0), p0, 0.0).p == p0.p);
  CHECK_THROWS_AS(propagate(singlet_at(40.0), p0, -1.0), std::invalid_argument);
}

TEST_CASE("complete-graph relaxation matches 1/3 + 2/3 exp(-3 r t)") {
  const double r = 2.5;
  const RateMatrix3 gen = RateMatrix3::from_transfer_rates(Eigen::Matrix3d::Constant(r));
  const PopulationState p0{Eigen::Vector3d(1.0, 0.0, 0.0)};
  for (double t : {0.01, 0.1, 0.4, 2.0}) {
    const PopulationState p = propagate(gen, p0, t);
    CHECK(std::abs(p.p(0) - (1.0 / 3 + 2.0 / 3 * std::exp(-3 * r * t))) < 1e-10);
    CHECK(std::abs(p.p(1) - (1.0 / 3 - 1.0 / 3 * std::exp(-3 * r * t))) < 1e-10);
  }
}

TEST_CASE("long times reach the stationary Boltzmann state") {
  const RateMatrix3 r = singlet_at(50.0, 12.0);
  const PopulationState p = propagate(r, PopulationState{Eigen::Vector3d(0, 1, 0)}, 1e12);
  const double mu = boltzmann_factor(9.7, 12.0);
  CHECK((p.p - boltzmann_populations(mu)).norm() < 1e-10);
}

TEST_CASE("semigroup property, conservation and non-negativity") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const RateMatrix3 r = singlet_at(90.0 * u(rng), 10.0 + 40.0 * u(rng));
    Eigen::Vector3d v(u(rng), u(rng), u(rng));
    const PopulationState p0{v / v.sum()};
    const double t1 = 10.0 * u(rng), t2 = 10.0 * u(rng);
    const PopulationState a = propagate(r, propagate(r, p0, t1), t2);
    const PopulationState b = propagate(r, p0, t1 + t2);
    CHECK((a.p - b.p).norm() < 1e-10);
    CHECK(std::abs(b.p.sum() - 1.0) < 1e-12);
    CHECK((b.p.array() >= 0.0).all());
  }
}

TEST_CASE("non-reversible generators use the general path and agree with a series") {
  Eigen::Matrix3d t = Eigen::Matrix3d::Zero();
  t(1, 0) = 3.0;
  t(2, 1) = 2.0;
  t(0, 2) = 1.5;
  t(0, 1) = 0.1;
  const RateMatrix3 r = RateMatrix3::from_transfer_rates(t);
  const PopulationState p0{Eigen::Vector3d(0.6, 0.3, 0.1)};
  for (double time : {0.05, 0.5, 3.0}) {
    const Eigen::Vector3d expect = series_exp(r.m * time) * p0.p;
    CHECK((propagate(r, p0, time).p - expect).norm() < 1e-10);
  }
}

TEST_CASE("a defective generator still propagates") {
  // 0 -> 1 -> 2 chain with equal rates: a Jordan block
  Eigen::Matrix3d t = Eigen::Matrix3d::Zero();
  t(1, 0) = 1.0;
  t(2, 1) = 1.0;
  const RateMatrix3 r = RateMatrix3::from_transfer_rates(t);
  const PopulationState p = propagate(r, PopulationState{Eigen::Vector3d(1, 0, 0)}, 1.0);
  CHECK(p.p(0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
  CHECK(p.p(1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));  // t e^{-t}
}

TEST_CASE("inversion recovery with no relaxation stays at the inverted value") {
  const std::vector<double> times = log_spaced(1e-3, 10.0, 20);
  const Eigen::Vector3d eq(0.3, 0.36, 0.34);
  const DecayCurve c = inversion_recovery_curve(RateMatrix3{}, Transition::zero_plus, 0.115, times, eq);
  const Eigen::Vector3d pol = polarized_populations(eq, 0.115);
  for (double s : c.signal) CHECK(s == doctest::Approx(pol(2) - pol(1)).epsilon(1e-14));
}

TEST_CASE("inversion recovery starts inverted and relaxes to the equilibrium difference") {
  const RateMatrix3 r = singlet_at(35.0);
  const std::vector<double> times = log_spaced(1e-10, 1e6, 60);
  for (Transition tr : {Transition::zero_plus, Transition::minus_zero}) {
    const DecayCurve c = inversion_recovery_curve(r, tr, 0.115, times);
    const auto pi = stationary_distribution(r);
    const auto [lo, hi] = transition_levels(tr);
    const Eigen::Vector3d start = polarized_populations(*pi, 0.115);
    CHECK(c.signal.front() == doctest::Approx(start(hi) - start(lo)).epsilon(1e-6));
    CHECK(std::abs(c.signal.back() - ((*pi)(lo) - (*pi)(hi))) < 1e-12);
  }
}

TEST_CASE("saturation recovery starts from zero contrast") {
  const DecayCurve c = saturation_recovery_curve(singlet_at(35.0), Transition::zero_plus, 0.115,
                                                 std::vector<double>{1e-12, 1.0});
  CHECK(std::abs(c.signal.front()) < 1e-9);
}

TEST_CASE("noise synthesis") {
  DecayCurve clean;
  clean.times = log_spaced(1e-3, 1.0, 10000);
  clean.signal.resize(clean.times.size());
  for (std::size_t k = 0; k < clean.times.size(); ++k) clean.signal[k] = std::exp(-clean.times[k]);

  CHECK(synthesize_noisy(clean, 0.0, 1).signal == clean.signal);
  const DecayCurve a = synthesize_noisy(clean, 0.05, 42);
  const DecayCurve b = synthesize_noisy(clean, 0.05, 42);
  CHECK(a.signal == b.signal);
  CHECK(synthesize_noisy(clean, 0.05, 43).signal != a.signal);

  double sum = 0.0, sum2 = 0.0;
  for (std::size_t k = 0; k < a.signal.size(); ++k) {
    const double d = a.signal[k] - clean.signal[k];
    sum += d;
    sum2 += d * d;
  }
  const double n = static_cast<double>(a.signal.size());
  const double sd = std::sqrt(sum2 / n - (sum / n) * (sum / n));
  const double nominal = 0.05 * 0.999;  // peak |signal| is exp(-1e-3)
  CHECK(std::abs(sd / nominal - 1.0) < 0.2);
  CHECK(a.sigma.size() == a.signal.size());
  CHECK_THROWS_AS(synthesize_noisy(clean, -0.1, 1), std::invalid_argument);
}

TEST_CASE("curve and state validation") {
  DecayCurve c;
  c.times = {0.0, 1.0, 1.0};
  c.signal = {1, 2, 3};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.times = {0.0, 1.0};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK_THROWS_AS((PopulationState{Eigen::Vector3d(0.5, 0.6, -0.1)}.validate()), std::invalid_argument);
  CHECK_THROWS_AS(polarized_populations(Eigen::Vector3d(1, 0, 0), 1.5), std::invalid_argument);
}
