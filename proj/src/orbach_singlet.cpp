#include "sivrelax/orbach_singlet.hpp"

#include <cmath>
#include <stdexcept>

#include "sivrelax/constants.hpp"

namespace sivrelax {

namespace {

double side_overlap(const OverlapTriple& ov, Transition t) {
  return t == Transition::zero_plus ? ov.plus() : ov.minus();
}

void check_overlaps(const ZeroFieldOverlaps& zf) {
  if (!(zf.t0_sq >= 0.0 && zf.tp_sq >= 0.0 && zf.tm_sq >= 0.0)) {
    throw std::invalid_argument("zero-field overlaps must be non-negative");
  }
}

}  // namespace

ZeroFieldOverlaps ZeroFieldOverlaps::from_ratio(double ratio) {
  if (!(ratio > 0.0)) throw std::invalid_argument("overlap ratio must be positive");
  const double side = 1.0 / (ratio * ratio);
  return ZeroFieldOverlaps{1.0, side, side};
}

double OrbachParams::activation() const {
  return activation_factor(activation_energy, temperature);
}

void validate(const OrbachParams& p) {
  if (!(p.rate_coefficient_c >= 0.0) || !(p.activation_energy >= 0.0) || !(p.temperature > 0.0) ||
      !(p.zeeman_freq >= 0.0)) {
    throw std::invalid_argument("Orbach parameters must be non-negative with T > 0");
  }
}

Eigen::Matrix3d wigner_d1(double beta) {
  const double c = std::cos(beta);
  const double s = std::sin(beta) / std::sqrt(2.0);
  Eigen::Matrix3d d;
  // rows m' = -1, 0, +1; columns m = -1, 0, +1
  d << (1.0 + c) / 2.0, s, (1.0 - c) / 2.0,
       -s, c, s,
       (1.0 - c) / 2.0, -s, (1.0 + c) / 2.0;
  return d;
}

Matrix3c wigner_big_d1(double alpha, double beta, double gamma) {
  const Eigen::Matrix3d d = wigner_d1(beta);
  Matrix3c out;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double mp = i - 1;
      const double m = j - 1;
      out(i, j) = std::polar(1.0, -mp * alpha) * d(i, j) * std::polar(1.0, -m * gamma);
    }
  }
  return out;
}

Eigen::Matrix3d mixing_matrix(double theta) {
  // |exp(-i m' phi)| = 1, so the azimuth average leaves |d^1|^2.
  return wigner_d1(theta).cwiseAbs2();
}

OverlapTriple mixed_overlaps(const ZeroFieldOverlaps& zf, double theta) {
  check_overlaps(zf);
  const Eigen::Vector3d zero_field(zf.tm_sq, zf.t0_sq, zf.tp_sq);
  const Eigen::Vector3d mixed = mixing_matrix(theta) * zero_field;
  return OverlapTriple{{mixed(0), mixed(1), mixed(2)}};
}

double boltzmann_factor(double zeeman_freq_ghz, double temperature_k) {
  if (!(temperature_k > 0.0)) {
    throw std::invalid_argument("boltzmann_factor: temperature must be positive");
  }
  return std::exp(frequency_to_kelvin(zeeman_freq_ghz) / temperature_k);
}

Eigen::Vector3d boltzmann_populations(double mu, BalanceConvention conv) {
  const double w = conv == BalanceConvention::symmetric ? mu : mu * mu;
  Eigen::Vector3d p(1.0 / w, 1.0, w);
  return p / p.sum();
}

RateMatrix3 singlet_rate_matrix(const OverlapTriple& ov, const OrbachParams& p,
                                BalanceConvention conv) {
  validate(p);
  const double mu = boltzmann_factor(p.zeeman_freq, p.temperature);
  const double scale = p.rate_coefficient_c * p.activation();
  const double exponent_per_step = conv == BalanceConvention::symmetric ? 0.5 : 1.0;

  Eigen::Matrix3d transfer = Eigen::Matrix3d::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      const double dm = static_cast<double>(i - j);  // m - m'
      transfer(i, j) = scale * ov.sq[i] * ov.sq[j] * std::pow(mu, exponent_per_step * dm);
    }
  }
  return RateMatrix3::from_transfer_rates(transfer);
}

RelaxationTimes relaxation_times_analytic(const ZeroFieldOverlaps& zf, double theta,
                                          const OrbachParams& p) {
  validate(p);
  check_overlaps(zf);
  const double side_scale = std::max(zf.tp_sq, zf.tm_sq);
  if (std::abs(zf.tp_sq - zf.tm_sq) > 1e-12 * side_scale) {
    throw std::invalid_argument(
        "relaxation_times_analytic: closed form requires |t0_+1| = |t0_-1|");
  }
  const OverlapTriple ov = mixed_overlaps(zf, theta);
  const double ce = p.rate_coefficient_c * p.activation();

  RelaxationTimes out;
  out.rate_a = 1.5 * ce * ov.zero() * (ov.plus() + ov.minus());
  out.rate_b = ce * ov.minus() * (2.0 * ov.plus() + ov.zero());
  out.t1_a = RelaxTime::from_rate(out.rate_a);
  out.t1_b = RelaxTime::from_rate(out.rate_b);
  return out;
}

RelaxationTimes relaxation_times_large_imbalance(const ZeroFieldOverlaps& zf, double theta,
                                                 const OrbachParams& p) {
  validate(p);
  check_overlaps(zf);
  const double k = p.rate_coefficient_c * zf.t0_sq * zf.t0_sq * p.activation();
  const double s2 = std::sin(2.0 * theta);
  const double s1 = std::sin(theta);
  RelaxationTimes out;
  out.rate_a = 0.375 * k * s2 * s2;
  out.rate_b = 0.5 * k * s1 * s1;
  out.t1_a = RelaxTime::from_rate(out.rate_a);
  out.t1_b = RelaxTime::from_rate(out.rate_b);
  return out;
}

RelaxTime t2_singlet(const ZeroFieldOverlaps& zf, double theta, const OrbachParams& p,
                     double t2_id, double t2_sd, Transition transition) {
  validate(p);
  const OverlapTriple ov = mixed_overlaps(zf, theta);
  // |t0_0|^2 + 2|t0_+-1|^2, written as the full sum so unequal side overlaps
  // are handled.
  const double zero_field_sum = zf.t0_sq + zf.tp_sq + zf.tm_sq;
  double rate = p.rate_coefficient_c / 3.0 * zero_field_sum *
                (ov.zero() + side_overlap(ov, transition)) * p.activation();
  if (t2_id > 0.0) rate += 1.0 / t2_id;
  if (t2_sd > 0.0) rate += 1.0 / t2_sd;
  return RelaxTime::from_rate(rate);
}

double t1_t2_ratio(const ZeroFieldOverlaps& zf, double theta, Transition transition) {
  const OverlapTriple ov = mixed_overlaps(zf, theta);
  const double side = side_overlap(ov, transition);
  const double zero_field_sum = zf.t0_sq + zf.tp_sq + zf.tm_sq;
  const double denom = 3.0 * side * ov.zero();
  if (!(denom > 0.0)) throw std::domain_error("t1_t2_ratio: T1_a is unbounded at this angle");
  return (side + ov.zero()) * zero_field_sum / denom;
}

}  // namespace sivrelax
