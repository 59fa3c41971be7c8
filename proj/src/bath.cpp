#include "sivrelax/bath.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "sivrelax/constants.hpp"

namespace sivrelax {

void PairBathParams::validate() const {
  if (!(density > 0.0) || !(flip_rate >= 0.0) || !(t2_sd_background >= 0.0) ||
      !std::isfinite(g1z) || !std::isfinite(g2z)) {
    throw std::invalid_argument("bath parameters: need density > 0, W >= 0, T2_SD >= 0");
  }
}

double PairBathParams::pair_distance() const {
  return std::cbrt(1.0 / (density * 1e6));  // cm^-3 -> m^-3
}

double dipolar_coupling(double r12, double theta12, double g1z, double g2z) {
  if (!(r12 > 0.0)) throw std::invalid_argument("dipolar_coupling: r12 must be > 0");
  const double c = std::cos(theta12);
  return si::mu0_over_4pi * g1z * g2z * si::bohr_magneton * si::bohr_magneton *
         (1.0 - 3.0 * c * c) / (si::reduced_planck * r12 * r12 * r12);
}

namespace {

/// cosh(R tau) e^{-W tau} and sinh(R tau)/R e^{-W tau} for R^2 = W^2 - A^2/4,
/// continued to imaginary R. Written so nothing overflows or cancels.
struct ScaledHyperbolic {
  double c = 1.0;
  double s = 0.0;
  double r_sq = 0.0;
};

ScaledHyperbolic scaled_hyperbolic(double a, double w, double tau) {
  const double quarter_a2 = 0.25 * a * a;
  ScaledHyperbolic h;
  h.r_sq = w * w - quarter_a2;
  const double damp = std::exp(-w * tau);
  if (h.r_sq > 0.0) {
    const double r = std::sqrt(h.r_sq);
    const double lead = std::exp(-quarter_a2 / (r + w) * tau);  // e^{(R - W) tau}
    const double tail = std::exp(-2.0 * r * tau);
    h.c = 0.5 * lead * (1.0 + tail);
    h.s = r * tau < 1e-8 ? tau * damp : lead * (-std::expm1(-2.0 * r * tau)) / (2.0 * r);
  } else {
    const double k = std::sqrt(-h.r_sq);
    const double x = k * tau;
    h.c = std::cos(x) * damp;
    h.s = (x < 1e-8 ? tau : std::sin(x) / k) * damp;
  }
  return h;
}

}  // namespace

double pair_echo_decay(double coupling, double flip_rate, double tau, EchoForm form) {
  if (!(tau >= 0.0)) throw std::invalid_argument("pair_echo_decay: tau must be >= 0");
  if (!(flip_rate >= 0.0)) throw std::invalid_argument("pair_echo_decay: W must be >= 0");
  if (tau == 0.0) return 1.0;
  const double a = coupling;
  const double w = flip_rate;
  const ScaledHyperbolic h = scaled_hyperbolic(a, w, tau);
  const double first = h.c + w * h.s;
  if (form == EchoForm::squared) return first * first + 0.25 * a * a * h.s * h.s;

  // sinh(R tau) to the first power: imaginary when R is, so only the real
  // (first) term survives there.
  if (h.r_sq <= 0.0) return first * first;
  const double r = std::sqrt(h.r_sq);
  // sinh(R tau) e^{-2 W tau} = (sinh(R tau)/R e^{-W tau}) * R e^{-W tau}
  return first * first + 0.25 * a * a / h.r_sq * h.s * r * std::exp(-w * tau);
}

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  std::vector<double> x(n), w(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

double averaged_pair_decay(const PairBathParams& p, double tau, EchoForm form) {
  p.validate();
  static const auto nodes = gauss_legendre(kAngularNodes);
  const double r = p.pair_distance();
  const double a0 = dipolar_coupling(r, 0.5 * std::numbers::pi, p.g1z, p.g2z);  // 1 - 3cos^2 = 1
  double sum = 0.0;
  for (int k = 0; k < kAngularNodes; ++k) {
    const double c = nodes.first[k];
    sum += nodes.second[k] * pair_echo_decay(a0 * (1.0 - 3.0 * c * c), p.flip_rate, tau, form);
  }
  return 0.5 * sum;
}

namespace {

double total_decay(const PairBathParams& p, double echo_time, EchoForm form) {
  const double background =
      p.t2_sd_background > 0.0 ? std::exp(-echo_time / p.t2_sd_background) : 1.0;
  return averaged_pair_decay(p, 0.5 * echo_time, form) * background;
}

}  // namespace

DecayCurve averaged_echo_decay(const PairBathParams& p, std::span<const double> taus,
                               EchoForm form) {
  DecayCurve out;
  for (double tau : taus) {
    out.times.push_back(2.0 * tau);
    out.signal.push_back(total_decay(p, 2.0 * tau, form));
  }
  out.validate();
  return out;
}

BathT2 bath_t2(const PairBathParams& p, EchoForm form) {
  p.validate();
  const double target = std::exp(-1.0);
  double t_hi = p.t2_sd_background > 0.0 ? p.t2_sd_background : 1e-6;
  for (int k = 0; total_decay(p, t_hi, form) > target; ++k) {
    if (k > 200) return BathT2{};
    t_hi *= 2.0;
  }

  BathT2 out;
  constexpr int kScan = 512;
  double prev_t = 0.0, prev_v = 1.0;
  double lo = 0.0, hi = t_hi;
  for (int k = 1; k <= kScan; ++k) {
    const double t = t_hi * k / kScan;
    const double v = total_decay(p, t, form);
    if (v > prev_v + 1e-12) out.non_monotone = true;
    if (v <= target) {
      lo = prev_t;
      hi = t;
      break;
    }
    prev_t = t;
    prev_v = v;
  }
  for (int iter = 0; iter < 200 && hi - lo > 1e-14 * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (total_decay(p, mid, form) > target ? lo : hi) = mid;
  }
  out.t2 = RelaxTime::from_seconds(0.5 * (lo + hi));
  return out;
}

}  // namespace sivrelax
