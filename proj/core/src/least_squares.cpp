// Copyright 2026 The tbri Authors
// SPDX-License-Identifier: Apache-2.0

#include "tbri/least_squares.hpp"

#include <algorithm>
#include <cmath>

namespace tbri {

namespace {

Eigen::MatrixXd jacobian(const ResidualFunction& residuals, const Eigen::VectorXd& x,
                         Eigen::Index rows) {
  Eigen::MatrixXd jac(rows, x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = 1e-6 * std::max(std::abs(x[j]), 1e-3);
    Eigen::VectorXd plus = x;
    Eigen::VectorXd minus = x;
    plus[j] += h;
    minus[j] -= h;
    jac.col(j) = (residuals(plus) - residuals(minus)) / (2.0 * h);
  }
  return jac;
}

}  // namespace

LevenbergMarquardtResult levenberg_marquardt(const ResidualFunction& residuals,
                                             Eigen::VectorXd initial,
                                             const LevenbergMarquardtOptions& options) {
  LevenbergMarquardtResult result;
  result.parameters = std::move(initial);
  Eigen::VectorXd r = residuals(result.parameters);
  result.cost = 0.5 * r.squaredNorm();
  double damping = options.initial_damping;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    result.iterations = iter + 1;
    const Eigen::MatrixXd jac = jacobian(residuals, result.parameters, r.size());
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd gradient = jac.transpose() * r;
    const Eigen::VectorXd scale = jtj.diagonal().cwiseMax(1e-30);

    bool improved = false;
    for (int attempt = 0; attempt < 30 && !improved; ++attempt) {
      Eigen::MatrixXd damped = jtj;
      damped.diagonal() += damping * scale;
      const Eigen::VectorXd step = damped.ldlt().solve(-gradient);
      const Eigen::VectorXd candidate = result.parameters + step;
      const Eigen::VectorXd r_new = residuals(candidate);
      const double cost_new = 0.5 * r_new.squaredNorm();

      if (std::isfinite(cost_new) && cost_new < result.cost) {
        const double decrease = (result.cost - cost_new) / std::max(result.cost, 1e-300);
        const double rel_step =
            step.norm() / std::max(result.parameters.norm(), 1e-300);
        result.parameters = candidate;
        r = r_new;
        result.cost = cost_new;
        damping = std::max(damping / 3.0, 1e-12);
        improved = true;
        if (decrease < options.cost_tolerance || rel_step < options.step_tolerance) {
          result.converged = true;
          return result;
        }
      } else {
        damping *= 4.0;
      }
    }
    if (!improved) {
      // No descent direction left at any damping: a stationary point.
      result.converged = gradient.norm() <= 1e-8 * std::max(1.0, std::sqrt(2.0 * result.cost)) ||
                         damping > 1e10;
      return result;
    }
  }
  return result;
}

}  // namespace tbri
