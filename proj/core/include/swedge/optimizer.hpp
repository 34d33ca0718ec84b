#pragma once

// Bound-constrained quasi-Newton minimization with finite-difference
// gradients. Used for variance parameters on the log scale.

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace swedge {

struct OptimizerOptions {
  int max_iterations = 500;
  double gradient_tolerance = 1e-6;
  /// Relative objective change accepted as convergence when the projected
  /// gradient is also below `loose_gradient_tolerance`.
  double relative_tolerance = 1e-10;
  double loose_gradient_tolerance = 1e-3;
  double difference_step = 1e-4;
  double max_step = 5.0;
  /// Extra jittered starts tried when the first run does not converge.
  int restarts = 3;
  bool keep_trace = false;
};

struct OptimizerResult {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd gradient;
  double gradient_norm = 0.0;
  int iterations = 0;
  int evaluations = 0;
  int restarts_used = 0;
  bool converged = false;
  /// Objective after each accepted iteration (first entry is the start).
  std::vector<double> trace;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

/// Central-difference gradient, falling back to one-sided differences at the
/// bounds.
Eigen::VectorXd numeric_gradient(const Objective& f, const Eigen::VectorXd& x, double fx,
                                 const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                 double step, int* evaluations = nullptr);

/// Minimizes f over the box [lower, upper] by projected BFGS with Armijo
/// backtracking. Non-finite objective values are treated as +infinity.
OptimizerResult minimize_box(const Objective& f, Eigen::VectorXd start, const Eigen::VectorXd& lower,
                             const Eigen::VectorXd& upper, const OptimizerOptions& options = {});

}  // namespace swedge
