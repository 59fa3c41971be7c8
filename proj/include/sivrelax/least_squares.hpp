#pragma once

// Levenberg-Marquardt minimizer for small dense nonlinear least-squares
// problems.

#include <functional>
#include <optional>

#include <Eigen/Dense>

namespace sivrelax {

struct LsqProblem {
  using Vec = Eigen::VectorXd;
  using Mat = Eigen::MatrixXd;

  std::function<Vec(const Vec&)> residuals;
  /// Optional analytic Jacobian d r_i / d x_j; central differences otherwise.
  std::function<Mat(const Vec&)> jacobian;
};

struct LsqOptions {
  int max_iterations = 200;
  double step_tolerance = 1e-9;  // relative parameter step
  double initial_damping = 1e-3;
};

struct LsqResult {
  Eigen::VectorXd x;
  Eigen::VectorXd residuals;
  Eigen::MatrixXd jacobian;
  Eigen::MatrixXd covariance;  // s^2 (J^T J)^+ with s^2 = rss / (n - p)
  double rss = 0.0;
  int iterations = 0;
  bool converged = false;
};

Eigen::MatrixXd numeric_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& x);

LsqResult levenberg_marquardt(const LsqProblem& problem, const Eigen::VectorXd& x0,
                              const LsqOptions& options = {});

/// Linearized covariance s^2 (J^T J)^+ from a Jacobian and residual sum.
Eigen::MatrixXd linearized_covariance(const Eigen::MatrixXd& jacobian, double rss);

}  // namespace sivrelax
