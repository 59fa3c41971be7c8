#include "sivrelax/least_squares.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sivrelax {

Eigen::MatrixXd numeric_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& x) {
  const double h0 = std::cbrt(std::numeric_limits<double>::epsilon());
  Eigen::MatrixXd j;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double h = h0 * std::max(std::abs(x(k)), 1.0);
    Eigen::VectorXd up = x, down = x;
    up(k) += h;
    down(k) -= h;
    const Eigen::VectorXd d = (f(up) - f(down)) / (up(k) - down(k));
    if (j.size() == 0) j.resize(d.size(), x.size());
    j.col(k) = d;
  }
  return j;
}

Eigen::MatrixXd linearized_covariance(const Eigen::MatrixXd& jacobian, double rss) {
  const Eigen::Index n = jacobian.rows();
  const Eigen::Index p = jacobian.cols();
  const double s2 = n > p ? rss / static_cast<double>(n - p) : rss;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(jacobian.transpose() * jacobian);
  return s2 * cod.pseudoInverse();
}

LsqResult levenberg_marquardt(const LsqProblem& problem, const Eigen::VectorXd& x0,
                              const LsqOptions& options) {
  auto jac = [&](const Eigen::VectorXd& x) {
    return problem.jacobian ? problem.jacobian(x) : numeric_jacobian(problem.residuals, x);
  };
  auto finite = [](const Eigen::VectorXd& v) { return v.allFinite(); };

  LsqResult out;
  out.x = x0;
  out.residuals = problem.residuals(x0);
  if (!finite(out.residuals)) {
    out.rss = std::numeric_limits<double>::infinity();
    return out;
  }
  out.rss = out.residuals.squaredNorm();
  Eigen::MatrixXd j = jac(out.x);
  double lambda = options.initial_damping;
  const Eigen::Index p = x0.size();

  for (out.iterations = 0; out.iterations < options.max_iterations; ++out.iterations) {
    if (out.rss == 0.0) {
      out.converged = true;
      break;
    }
    // Marquardt scaling: damp each direction by its own curvature.
    Eigen::VectorXd d = j.colwise().norm().transpose();
    for (Eigen::Index k = 0; k < p; ++k) d(k) = std::max(d(k), 1e-12);
    const Eigen::VectorXd gradient = j.transpose() * out.residuals;
    if (gradient.cwiseQuotient(d).norm() <= 1e-14 * std::sqrt(out.rss)) {
      out.converged = true;
      break;
    }

    bool accepted = false;
    while (lambda < 1e16) {
      Eigen::MatrixXd aug(j.rows() + p, p);
      aug.topRows(j.rows()) = j;
      aug.bottomRows(p) = std::sqrt(lambda) * d.asDiagonal().toDenseMatrix();
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(j.rows() + p);
      rhs.head(j.rows()) = -out.residuals;
      const Eigen::VectorXd step = aug.colPivHouseholderQr().solve(rhs);
      const Eigen::VectorXd trial = out.x + step;
      const Eigen::VectorXd r = problem.residuals(trial);
      const double rss = finite(r) ? r.squaredNorm() : std::numeric_limits<double>::infinity();
      if (rss <= out.rss) {
        const double rel_step = step.norm() / (out.x.norm() + options.step_tolerance);
        const double old_rss = out.rss;
        out.x = trial;
        out.residuals = r;
        out.rss = rss;
        j = jac(out.x);
        lambda = std::max(lambda / 10.0, 1e-15);
        accepted = true;
        if (rel_step < options.step_tolerance || old_rss - rss <= 1e-15 * old_rss) {
          out.converged = true;
        }
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) {
      // No downhill step at any damping: a stationary point to working precision.
      out.converged = true;
      break;
    }
    if (out.converged) {
      ++out.iterations;
      break;
    }
  }
  out.jacobian = j;
  out.covariance = linearized_covariance(j, out.rss);
  return out;
}

}  // namespace sivrelax
