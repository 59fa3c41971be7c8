#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "sivrelax/constants.hpp"
#include "sivrelax/spin_core.hpp"

using namespace sivrelax;

namespace {

const double kMuB = kConstants.bohr_magneton_over_h;  // GHz/mT

SpinSystemParams siv(double field_mt, double theta, double phi = 0.0) {
  SpinSystemParams p;
  p.field = FieldConfig{field_mt, theta, phi, SiteLabel::unspecified};
  return p;
}

}  // namespace

TEST_CASE("unit conversions agree with hand arithmetic") {
  // muB/h = 13.996 GHz/T
  CHECK(kMuB == doctest::Approx(13.996245e-3).epsilon(1e-6));
  // 1 meV = 11.6045 K
  CHECK(kConstants.mev_to_kelvin == doctest::Approx(11.604518).epsilon(1e-7));
  CHECK(frequency_to_kelvin(9.7) == doctest::Approx(0.465526).epsilon(1e-5));
  CHECK(activation_factor(16.8, 30.0) == doctest::Approx(std::exp(-16.8 * 11.604518 / 30.0)).epsilon(1e-7));
  CHECK_THROWS_AS(activation_factor(16.8, 0.0), std::invalid_argument);
}

TEST_CASE("spin-1 operators satisfy the angular momentum algebra") {
  const auto& s = spin1_operators();
  const std::complex<double> i(0.0, 1.0);
  CHECK((s[0] * s[1] - s[1] * s[0] - i * s[2]).norm() < 1e-14);
  CHECK((s[1] * s[2] - s[2] * s[1] - i * s[0]).norm() < 1e-14);
  CHECK((s[2] * s[0] - s[0] * s[2] - i * s[1]).norm() < 1e-14);
  const Matrix3c s2 = s[0] * s[0] + s[1] * s[1] + s[2] * s[2];
  CHECK((s2 - 2.0 * Matrix3c::Identity()).norm() < 1e-14);
}

TEST_CASE("zero-field spectrum is -2D/3 and D/3 -+ E") {
  SpinSystemParams p = siv(0.0, 0.0);
  p.zfs = ZfsTensor{0.94, 0.05, 0.0, 0.0};
  const EigenSystem3 es = eigensolve(build_hamiltonian(p));
  CHECK(es.energies[0] == doctest::Approx(-2 * 0.94 / 3).epsilon(1e-12));
  CHECK(es.energies[1] == doctest::Approx(0.94 / 3 - 0.05).epsilon(1e-12));
  CHECK(es.energies[2] == doctest::Approx(0.94 / 3 + 0.05).epsilon(1e-12));
}

TEST_CASE("B = 0 and D = 0 gives a threefold degenerate, flagged spectrum") {
  SpinSystemParams p = siv(0.0, 0.0);
  p.zfs = ZfsTensor::axial(0.0);
  const EigenSystem3 es = eigensolve(build_hamiltonian(p));
  CHECK(es.degenerate);
  for (double e : es.energies) CHECK(std::abs(e) < 1e-15);
}

TEST_CASE("axial field: levels are -D/3 + m^2 D + m g muB B exactly") {
  const double b = 346.0;
  const EigenSystem3 es = eigensolve(build_hamiltonian(siv(b, 0.0)));
  const double d = 0.94, z = 2.0042 * kMuB * b;
  CHECK(es.energies[0] == doctest::Approx(d / 3 - z).epsilon(1e-12));
  CHECK(es.energies[1] == doctest::Approx(-2 * d / 3).epsilon(1e-12));
  CHECK(es.energies[2] == doctest::Approx(d / 3 + z).epsilon(1e-12));
}

TEST_CASE("eigenvectors are orthonormal and diagonalize H for random fields") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    SpinSystemParams p = siv(500.0 * u(rng), std::numbers::pi * u(rng), 2 * std::numbers::pi * u(rng));
    p.zfs = ZfsTensor{3.0 * u(rng), 0.3 * u(rng), std::numbers::pi * u(rng), 2 * std::numbers::pi * u(rng)};
    const Matrix3c h = build_hamiltonian(p);
    CHECK((h - h.adjoint()).norm() < 1e-12);
    const EigenSystem3 es = eigensolve(h);
    CHECK((es.states.adjoint() * es.states - Matrix3c::Identity()).norm() < 1e-12);
    Matrix3c diag = es.states.adjoint() * h * es.states;
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(diag(i, i).real() - es.energies[i]) < 1e-10);
      diag(i, i) = 0.0;
    }
    CHECK(diag.norm() < 1e-10);
    CHECK(es.energies[0] <= es.energies[1]);
    CHECK(es.energies[1] <= es.energies[2]);
  }
}

TEST_CASE("eigensolve rejects non-Hermitian input") {
  Matrix3c h = Matrix3c::Zero();
  h(0, 1) = 1.0;
  CHECK_THROWS_AS(eigensolve(h), std::invalid_argument);
}

TEST_CASE("parameter validation") {
  SpinSystemParams p = siv(-1.0, 0.0);
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p = siv(100.0, 4.0);
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p = siv(100.0, 0.5);
  p.g = GTensor::isotropic(3.0);
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
}

TEST_CASE("resonance fields on axis match the closed form (f -+ D) / (g muB)") {
  const auto res = resonance_fields(siv(0.0, 0.0), 9.7);
  REQUIRE(res.size() == 2);
  const double g = 2.0042;
  double lo = std::min(res[0].field_mt, res[1].field_mt);
  double hi = std::max(res[0].field_mt, res[1].field_mt);
  CHECK(lo == doctest::Approx((9.7 - 0.94) / (g * kMuB)).epsilon(1e-10));
  CHECK(hi == doctest::Approx((9.7 + 0.94) / (g * kMuB)).epsilon(1e-10));
  // the measured spectrum puts each line 33.5 mT from centre
  CHECK(std::abs((hi - lo) - 67.0) < 0.5);
  // |<0|S_x|+-1>|^2 = 1/2
  for (const auto& r : res) CHECK(r.transition_moment == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("resonance fields are resonant") {
  for (double theta : {0.3, 1.0, 1.9}) {
    for (const auto& r : resonance_fields(siv(0.0, theta), 9.7)) {
      const EigenSystem3 es = eigensolve(build_hamiltonian(siv(r.field_mt, theta)));
      CHECK(es.energies[r.upper] - es.energies[r.lower] == doctest::Approx(9.7).epsilon(1e-9));
    }
  }
}

TEST_CASE("site geometry") {
  const auto& axes = site_axes_111();
  for (int i = 0; i < 4; ++i) {
    CHECK(axes[i].norm() == doctest::Approx(1.0));
    for (int j = i + 1; j < 4; ++j) CHECK(axes[i].dot(axes[j]) == doctest::Approx(-1.0 / 3.0));
  }
  const Eigen::Vector3d b = misaligned_field_111(deg_to_rad(2.6));
  CHECK(rad_to_deg(std::acos(b.dot(axes[0]))) == doctest::Approx(2.6));
  CHECK(rad_to_deg(std::acos(b.dot(axes[3]))) == doctest::Approx(106.87).epsilon(1e-3));
  CHECK(std::abs(b.dot(axes[1]) - b.dot(axes[2])) < 1e-12);
}

TEST_CASE("ESR spectrum: aligned field gives two line groups per transition family") {
  SpinSystemParams base;
  const auto aligned = group_lines(esr_spectrum_111(base, 9.7, 0.0));
  CHECK(aligned.size() == 4);
  // on-axis outer pair and three-fold degenerate inner pair
  int three_site = 0;
  for (const auto& g : aligned) three_site += g.sites == 3;
  CHECK(three_site == 2);
  const auto tilted = group_lines(esr_spectrum_111(base, 9.7, deg_to_rad(2.6)));
  CHECK(tilted.size() == 6);
}

TEST_CASE("effective g interpolates between the axial values") {
  const GTensor g = GTensor::siv0();
  CHECK(effective_g(g, 0.0) == doctest::Approx(g.g_parallel));
  CHECK(effective_g(g, std::numbers::pi / 2) == doctest::Approx(g.g_perpendicular));
}
