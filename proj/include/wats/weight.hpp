#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "wats/basis.hpp"
#include "wats/lmm.hpp"

namespace wats {

// Nonnegative unit-integral weight w(t) = c (u(t)' v)^2 over a spline basis u.
struct WeightModel {
  Basis u_basis;
  Eigen::VectorXd v;
  double norm_const = 1.0;  // c with c * integral (u'v)^2 = 1
  double objective = 0.0;   // Rayleigh quotient at v
  bool fallback_uniform = false;

  WeightModel(Basis u, Eigen::VectorXd coeffs, double c)
      : u_basis(std::move(u)), v(std::move(coeffs)), norm_const(c) {}

  double weight(double t) const;
};

// Returns the model for the uniform weight expressed in u_spec's coefficients
// (requires a basis that spans constants, true for B-splines).
WeightModel uniform_weight_model(const BasisSpec& u_spec);

// S_w' beta with S_w integrated under the model's normalized weight.
double wats_value(const WeightModel& weight, const Basis& traj_basis,
                  const Eigen::VectorXd& beta);

// S_w for the model's normalized weight.
Eigen::VectorXd weight_slope_vector(const WeightModel& weight, const Basis& traj_basis);

struct WatsMatrices {
  Eigen::MatrixXd M1, M2;  // k_w x k_w, integral u u' (g' beta_k)
  Eigen::MatrixXd H;       // k_w x p, integral u u' v g'
  Eigen::MatrixXd A;       // (M1 - M2) v v' (M1 - M2)'
  Eigen::MatrixXd B;       // H (Cov1 + Cov2) H'
};

WatsMatrices build_wats_matrices(const Basis& u_basis, const Basis& traj_basis,
                                 const Eigen::VectorXd& v, const Eigen::VectorXd& beta1,
                                 const Eigen::VectorXd& beta2, const Eigen::MatrixXd& cov1,
                                 const Eigen::MatrixXd& cov2);

struct WeightOptions {
  int starts = 10;  // random unit-sphere starts, plus the uniform start
  int max_iter = 5000;
  double f_tol = 1e-10;
};

// Separation objective (theta1 - theta2)^2 / Var(theta1 - theta2) as a
// function of the unnormalized coefficients v; scale-invariant in v.
double rayleigh_objective(const Basis& u_basis, const Basis& traj_basis,
                          const Eigen::VectorXd& v, const Eigen::VectorXd& beta1,
                          const Eigen::VectorXd& beta2, const Eigen::MatrixXd& cov1,
                          const Eigen::MatrixXd& cov2);

// Multi-start simplex maximization of the separation objective; falls back to
// the uniform weight when no start improves on it.
WeightModel optimize_weight(const LmmFit& fit1, const LmmFit& fit2, const Basis& traj_basis,
                            const BasisSpec& u_spec, std::uint64_t seed,
                            const WeightOptions& opts = {});

// S_w' (beta + b_i) for one fitted subject.
double individual_wats(const WeightModel& weight, const Basis& traj_basis, const LmmFit& fit,
                       int subject_pos);

}  // namespace wats
