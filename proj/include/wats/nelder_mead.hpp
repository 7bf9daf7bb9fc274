#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace wats {

struct NelderMeadOptions {
  int max_iter = 2000;
  double f_tol = 1e-9;          // stop when the simplex objective spread falls below this
  double init_step = 0.05;      // relative perturbation for nonzero coordinates
  double init_step_zero = 2.5e-4;
  bool record_trace = false;    // best objective after each accepted iteration
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double fmin = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::vector<double> trace;
};

// Derivative-free simplex minimization (reflection/expansion/contraction/shrink
// with the standard coefficients).
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0,
                             const NelderMeadOptions& opts = {});

}  // namespace wats
