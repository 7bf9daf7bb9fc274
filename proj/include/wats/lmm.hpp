#pragma once

#include <vector>

#include <Eigen/Dense>

#include "wats/basis.hpp"
#include "wats/dataset.hpp"

namespace wats {

struct LmmOptions {
  // Random-effect design = leading random_dim columns of the fixed design.
  // -1 selects the default min(p, 3): the full design for polynomial models up
  // to quadratic, intercept/linear/quadratic only for spline models.
  int random_dim = -1;
  int max_iter = 2000;
  double f_tol = 1e-9;
  int restarts = 1;  // simplex polish passes after first convergence
};

// Maximum-likelihood fit of one group's mixed model.
struct LmmFit {
  Eigen::VectorXd beta;          // fixed effects, length p
  Eigen::MatrixXd D;             // random-effect covariance, p_r x p_r
  double sigma2 = 0.0;
  Eigen::MatrixXd cov_beta;      // (sum_i X_i' V_i^-1 X_i)^-1
  double loglik = 0.0;
  bool converged = false;

  std::vector<int> subject_index;         // rows into dataset.subjects()
  std::vector<Eigen::VectorXd> blups;     // aligned with subject_index
  int n_obs = 0;
  int ridge_events = 0;                   // V repairs during optimization
  std::vector<double> trace;              // best objective per accepted iteration

  int n_subjects() const { return static_cast<int>(subject_index.size()); }
  int p() const { return static_cast<int>(beta.size()); }
  int random_dim() const { return static_cast<int>(D.rows()); }
};

// Fits each group separately; result is indexed by group.
std::vector<LmmFit> fit_lmm(const LongitudinalDataset& data, const Basis& basis,
                            const LmmOptions& opts = {});

// Fit restricted to one group.
LmmFit fit_lmm_group(const LongitudinalDataset& data, int group, const Basis& basis,
                     const LmmOptions& opts = {});

// D Z_i' V_i^-1 (y_i - X_i beta) for one subject of the fitted group.
Eigen::VectorXd blup(const LmmFit& fit, const Basis& basis, const SubjectRecord& subject);

// Subject-specific coefficient vector beta + b_i (b padded to length p).
Eigen::VectorXd individual_coefficients(const LmmFit& fit, const Eigen::VectorXd& b);

// pooled = true: one shared (beta, D, sigma2) across all groups;
// pooled = false: sum of per-group maximized log-likelihoods.
double loglik_joint(const LongitudinalDataset& data, const Basis& basis, bool pooled,
                    const LmmOptions& opts = {});

}  // namespace wats
