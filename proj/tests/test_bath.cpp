#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "sivrelax/bath.hpp"

using namespace sivrelax;

namespace {

constexpr double kPi = std::numbers::pi;

// Direct complex evaluation; fine away from R = 0 and for modest W tau.
double echo_oracle(double a, double w, double tau) {
  const std::complex<double> r = std::sqrt(std::complex<double>(w * w - 0.25 * a * a, 0.0));
  const std::complex<double> ch = std::cosh(r * tau), sh = std::sinh(r * tau);
  const std::complex<double> v = (ch + w / r * sh) * (ch + w / r * sh) + 0.25 * a * a / (r * r) * sh * sh;
  return v.real() * std::exp(-2.0 * w * tau);
}

}  // namespace

TEST_CASE("dipolar coupling magnitude and angular pattern") {
  // Point-dipole constant 52.04 MHz nm^3 holds for free electrons; rescale to g = 2.
  const double r = 36.84e-9;
  const double expect = 2.0 * kPi * 52.04e6 * std::pow(2.0 / 2.00232, 2.0) / std::pow(36.84, 3.0);
  CHECK(dipolar_coupling(r, kPi / 2, 2.0, 2.0) == doctest::Approx(expect).epsilon(2e-3));
  CHECK(dipolar_coupling(r, 0.0, 2.0, 2.0) ==
        doctest::Approx(-2.0 * dipolar_coupling(r, kPi / 2, 2.0, 2.0)).epsilon(1e-14));
  const double magic = std::acos(1.0 / std::sqrt(3.0));
  CHECK(std::abs(dipolar_coupling(r, magic, 2.0, 2.0)) < 1e-12 * expect);
  CHECK(dipolar_coupling(r, kPi / 2, 2.0, 4.0) == doctest::Approx(2.0 * expect).epsilon(2e-3));
  CHECK_THROWS_AS(dipolar_coupling(0.0, 0.0, 2.0, 2.0), std::invalid_argument);
}

TEST_CASE("pair distance from density") {
  PairBathParams p;
  p.density = 2e16;
  CHECK(p.pair_distance() == doctest::Approx(std::cbrt(5e-23)).epsilon(1e-14));
}

TEST_CASE("echo decay matches direct complex evaluation on both branches") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 500; ++k) {
    const double a = 2e4 * u(rng);
    const double w = 2e4 * u(rng);
    const double tau = 3e-4 * u(rng);
    if (std::abs(w * w - 0.25 * a * a) < 1e-3 * w * w) continue;
    CHECK(pair_echo_decay(a, w, tau) == doctest::Approx(echo_oracle(a, w, tau)).epsilon(1e-9));
  }
}

TEST_CASE("echo decay limits") {
  CHECK(pair_echo_decay(1e4, 300.0, 0.0) == 1.0);
  for (double tau : {1e-6, 1e-4, 1e-2, 1.0}) {
    CHECK(pair_echo_decay(0.0, 500.0, tau) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pair_echo_decay(1e4, 0.0, tau) == doctest::Approx(1.0).epsilon(1e-12));
  }
  // The sinh^1 form is not unity without flips.
  CHECK(std::abs(pair_echo_decay(1e4, 0.0, 1e-4, EchoForm::as_printed) - 1.0) > 1e-3);
}

TEST_CASE("echo decay is continuous across A = 2W") {
  const double w = 800.0;
  for (double tau : {1e-4, 1e-3, 1e-2}) {
    const double below = pair_echo_decay(2.0 * w * (1 - 1e-9), w, tau);
    const double at = pair_echo_decay(2.0 * w, w, tau);
    const double above = pair_echo_decay(2.0 * w * (1 + 1e-9), w, tau);
    CHECK(below == doctest::Approx(at).epsilon(1e-7));
    CHECK(above == doctest::Approx(at).epsilon(1e-7));
  }
}

TEST_CASE("echo decay stays finite for large W tau") {
  for (double tau : {1.0, 10.0, 100.0}) {
    const double v = pair_echo_decay(1e4, 1e5, tau);
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
  const auto [x, w] = gauss_legendre(kAngularNodes);
  double total = 0.0;
  for (double wk : w) total += wk;
  CHECK(total == doctest::Approx(2.0).epsilon(1e-14));
  for (int deg : {2, 10, 40, 126}) {
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) s += w[k] * std::pow(x[k], deg);
    CHECK(s == doctest::Approx(2.0 / (deg + 1)).epsilon(1e-12));
  }
}

TEST_CASE("orientation average agrees with a fine midpoint rule") {
  PairBathParams p;
  p.density = 5e16;
  p.flip_rate = 600.0;
  const double a0 = dipolar_coupling(p.pair_distance(), kPi / 2, 2.0, 2.0);
  for (double tau : {1e-4, 5e-4, 2e-3}) {
    const int n = 20000;
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
      const double c = -1.0 + (k + 0.5) * 2.0 / n;
      s += pair_echo_decay(a0 * (1 - 3 * c * c), p.flip_rate, tau);
    }
    CHECK(averaged_pair_decay(p, tau) == doctest::Approx(s / n).epsilon(1e-6));
  }
  p.flip_rate = 0.0;
  CHECK(averaged_pair_decay(p, 1e-3) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("echo curves use total echo time and include the background") {
  PairBathParams p;
  p.flip_rate = 0.0;
  const std::vector<double> taus{1e-5, 1e-4, 1e-3};
  const DecayCurve c = averaged_echo_decay(p, taus);
  for (std::size_t k = 0; k < taus.size(); ++k) {
    CHECK(c.times[k] == 2.0 * taus[k]);
    CHECK(c.signal[k] == doctest::Approx(std::exp(-2.0 * taus[k] / 0.95e-3)).epsilon(1e-12));
  }
}

TEST_CASE("dilute limit recovers the background T2") {
  PairBathParams p;
  p.density = 1e8;
  p.flip_rate = 500.0;
  const BathT2 t = bath_t2(p);
  CHECK(t.t2.seconds() == doctest::Approx(0.95e-3).epsilon(1e-6));
  CHECK_FALSE(t.non_monotone);
}

TEST_CASE("T2 shortens with density") {
  PairBathParams p;
  p.flip_rate = 500.0;
  double prev = std::numeric_limits<double>::infinity();
  for (double n : {1e15, 5e15, 1e16, 5e16, 1e17, 5e17}) {
    p.density = n;
    const double t2 = bath_t2(p).t2.seconds();
    CHECK(t2 < prev);
    prev = t2;
  }
}

TEST_CASE("no background and no flips never decays") {
  PairBathParams p;
  p.t2_sd_background = 0.0;
  p.flip_rate = 0.0;
  CHECK_FALSE(bath_t2(p).t2.bounded());
}

TEST_CASE("parameter validation") {
  PairBathParams p;
  p.density = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  CHECK_THROWS_AS(pair_echo_decay(1.0, -1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(pair_echo_decay(1.0, 1.0, -1.0), std::invalid_argument);
}
