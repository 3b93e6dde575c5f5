#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace pmuguard {

struct LmOptions {
  int max_iters = 200;
  double gradient_tol = 1e-12;  // on ||grad f||_inf, f = ||r||^2
  double step_tol = 1e-15;      // relative step size treated as stationary
  double damping_init = 1e-3;   // scaled by max diag(J^T J)
};

struct LmResult {
  Eigen::VectorXd x;
  double cost = 0.;  // ||r(x)||^2
  double gradient_norm = 0.;
  int iterations = 0;
  bool converged = false;
};

/// Levenberg-Marquardt with Nielsen's damping update. `Problem` provides
///   Eigen::VectorXd residual(const Eigen::VectorXd&) const;
///   Eigen::MatrixXd jacobian(const Eigen::VectorXd&) const;
template <class Problem>
LmResult levenberg_marquardt(const Problem& problem, Eigen::VectorXd x, const LmOptions& opt = {}) {
  LmResult res;
  Eigen::VectorXd r = problem.residual(x);
  Eigen::MatrixXd jac = problem.jacobian(x);
  Eigen::MatrixXd a = jac.transpose() * jac;
  Eigen::VectorXd g = jac.transpose() * r;  // half the gradient of ||r||^2
  double cost = r.squaredNorm();
  const double mu0 = opt.damping_init * std::max(a.diagonal().maxCoeff(), 1e-300);
  double mu = mu0;
  double nu = 2.0;
  int restarts = 0;
  const Eigen::Index n = x.size();
  constexpr double eps = std::numeric_limits<double>::epsilon();

  int it = 0;
  for (; it < opt.max_iters; ++it) {
    if (2.0 * g.lpNorm<Eigen::Infinity>() <= opt.gradient_tol) {
      res.converged = true;
      break;
    }
    const Eigen::MatrixXd damped = a + mu * Eigen::MatrixXd::Identity(n, n);
    const Eigen::VectorXd h = damped.ldlt().solve(-g);
    if (h.norm() <= opt.step_tol * (x.norm() + opt.step_tol)) {
      // A run of rejections can inflate mu until the step vanishes while the
      // gradient is still above tolerance; retry from the initial damping.
      if (restarts < 3) {
        ++restarts;
        mu = mu0;
        nu = 2.0;
        continue;
      }
      res.converged = true;
      break;
    }
    const Eigen::VectorXd x_new = x + h;
    const Eigen::VectorXd r_new = problem.residual(x_new);
    const double cost_new = r_new.squaredNorm();
    const double predicted = h.dot(mu * h - g);  // 2x the model decrease of 0.5||r||^2
    const double rho = predicted > 0 ? (cost - cost_new) / predicted : -1.0;
    // Near a minimizer with nonzero cost the decrease drops below the
    // round-off of the cost itself; fall back to the gradient to decide.
    const bool in_noise = std::abs(cost - cost_new) <= 16.0 * eps * std::max(cost, cost_new);
    Eigen::MatrixXd jac_new;
    Eigen::VectorXd g_new;
    bool accept = rho > 0;
    if (!accept && in_noise) {
      jac_new = problem.jacobian(x_new);
      g_new = jac_new.transpose() * r_new;
      accept = g_new.lpNorm<Eigen::Infinity>() < g.lpNorm<Eigen::Infinity>();
    }
    if (accept) {
      x = x_new;
      r = r_new;
      cost = cost_new;
      jac = jac_new.size() ? jac_new : problem.jacobian(x);
      a = jac.transpose() * jac;
      g = g_new.size() ? g_new : Eigen::VectorXd(jac.transpose() * r);
      if (rho > 0) mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
      nu = 2.0;
    } else {
      mu *= nu;
      nu *= 2.0;
      if (!std::isfinite(mu)) break;
    }
  }
  res.x = x;
  res.cost = cost;
  res.gradient_norm = 2.0 * g.lpNorm<Eigen::Infinity>();
  res.iterations = it;
  if (!res.converged && 2.0 * g.lpNorm<Eigen::Infinity>() <= opt.gradient_tol) res.converged = true;
  return res;
}

}  // namespace pmuguard
