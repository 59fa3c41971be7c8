#include "sivrelax/rate_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace sivrelax {

std::string RelaxTime::str() const {
  if (!seconds_) return "unbounded";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g s", *seconds_);
  return buf;
}

RateMatrix3 RateMatrix3::from_transfer_rates(const Eigen::Matrix3d& off_diagonal) {
  RateMatrix3 r;
  r.m = off_diagonal;
  for (int j = 0; j < 3; ++j) {
    r.m(j, j) = 0.0;
    double out = 0.0;
    for (int i = 0; i < 3; ++i) {
      if (i != j) out += r.m(i, j);
    }
    r.m(j, j) = -out;
  }
  return r;
}

GeneratorCheck check_generator(const RateMatrix3& r) {
  GeneratorCheck c;
  const double scale = std::max(r.m.cwiseAbs().maxCoeff(), 1e-300);
  for (int j = 0; j < 3; ++j) {
    c.column_sum_residual = std::max(c.column_sum_residual, std::abs(r.m.col(j).sum()) / scale);
    for (int i = 0; i < 3; ++i) {
      if (i != j) c.min_off_diagonal = std::min(c.min_off_diagonal, r.m(i, j));
    }
  }
  return c;
}

std::optional<Eigen::Vector3d> stationary_distribution(const RateMatrix3& r) {
  // pi_i is proportional to the principal 2x2 minor that excludes state i.
  const Eigen::Matrix3d& a = r.m;
  Eigen::Vector3d pi;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3;
    const int k = (i + 2) % 3;
    pi(i) = a(j, j) * a(k, k) - a(j, k) * a(k, j);
  }
  const double total = pi.sum();
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  if (!(std::abs(total) > 1e-14 * scale * scale)) return std::nullopt;
  return pi / total;
}

RelaxationTimes relaxation_times_numeric(const RateMatrix3& r) {
  // Orthonormal basis of the complement of (1,1,1): antisymmetric then symmetric.
  Eigen::Matrix<double, 3, 2> q;
  q.col(0) = Eigen::Vector3d(-1.0, 0.0, 1.0) / std::sqrt(2.0);
  q.col(1) = Eigen::Vector3d(1.0, -2.0, 1.0) / std::sqrt(6.0);
  const Eigen::Matrix2d block = q.transpose() * r.m * q;

  const double tr = block.trace();
  const double det = block.determinant();
  double disc = tr * tr - 4.0 * det;
  const double scale = std::max(block.cwiseAbs().maxCoeff(), 1e-300);
  if (disc < 0.0) {
    if (disc < -1e-10 * scale * scale) {
      throw NumericError("relaxation_times_numeric: complex relaxation eigenvalues");
    }
    disc = 0.0;
  }
  const double root = std::sqrt(disc);
  // Vieta for the smaller-magnitude root avoids cancellation when the two
  // rates are far apart.
  const double lam2 = 0.5 * (tr - root);
  const double lam1 = lam2 != 0.0 ? det / lam2 : 0.5 * (tr + root);

  auto eigvec = [&](double lam) -> Eigen::Vector2d {
    const Eigen::Vector2d u(block(0, 1), lam - block(0, 0));
    const Eigen::Vector2d v(lam - block(1, 1), block(1, 0));
    const Eigen::Vector2d w = u.norm() >= v.norm() ? u : v;
    if (w.norm() <= 1e-12 * scale) return Eigen::Vector2d(0.0, 0.0);
    return w.normalized();
  };

  double anti_weight1;
  if (root <= 1e-12 * scale) {
    // Equal rates. A generator with a real spectrum that is not a multiple of
    // the identity on this block is defective.
    if ((block - 0.5 * tr * Eigen::Matrix2d::Identity()).norm() > 1e-8 * scale) {
      throw NumericError("relaxation_times_numeric: defective rate matrix");
    }
    anti_weight1 = 0.0;
  } else {
    anti_weight1 = std::abs(eigvec(lam1)(0)) - std::abs(eigvec(lam2)(0));
  }

  // lam1 goes to mode b when its eigenvector is the more antisymmetric one.
  const double lam_b = anti_weight1 > 0.0 ? lam1 : lam2;
  const double lam_a = anti_weight1 > 0.0 ? lam2 : lam1;

  RelaxationTimes out;
  out.rate_a = std::max(0.0, -lam_a);
  out.rate_b = std::max(0.0, -lam_b);
  out.t1_a = RelaxTime::from_rate(out.rate_a);
  out.t1_b = RelaxTime::from_rate(out.rate_b);
  return out;
}

}  // namespace sivrelax
