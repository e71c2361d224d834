// Copyright 2026 The tbri Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <functional>

namespace tbri {

/// Maps parameters to the residual vector r(x); the fit minimizes |r|^2.
using ResidualFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct LevenbergMarquardtOptions {
  int max_iterations = 500;
  double initial_damping = 1e-3;
  double step_tolerance = 1.5e-8;  ///< relative parameter change
  double cost_tolerance = 1.5e-8;  ///< relative cost decrease
};

struct LevenbergMarquardtResult {
  Eigen::VectorXd parameters;
  double cost = 0.0;  ///< 0.5 * |r|^2 at `parameters`
  int iterations = 0;
  bool converged = false;
};

/// Damped Gauss-Newton with a central-difference Jacobian and Marquardt
/// diagonal scaling. Never throws on non-convergence; callers inspect
/// `converged`.
LevenbergMarquardtResult levenberg_marquardt(const ResidualFunction& residuals,
                                             Eigen::VectorXd initial,
                                             const LevenbergMarquardtOptions& options = {});

}  // namespace tbri
