#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wats/dataset.hpp"

namespace wats {

struct MissingnessSpec {
  enum class Mechanism { None, Mcar, Dropout, Mnar };

  Mechanism mechanism = Mechanism::None;
  double rate = 0.15;              // MCAR per-cell deletion probability
  DropoutLaw law;                  // dropout law over last observed time
  double latent_sd = 3.0;          // MNAR latent scale
  double cutoff = -1.15;           // MNAR deletion threshold on the latent draw
  // Sensitivity switch: add the latent value to retained non-baseline outcomes
  // instead of using it purely as a deletion trigger.
  bool mnar_perturb_values = false;

  static MissingnessSpec none();
  static MissingnessSpec mcar(double rate);
  static MissingnessSpec dropout(DropoutLaw law);
  static MissingnessSpec mnar(double latent_sd, double cutoff);

  std::string describe() const;
  void validate(const TimeGrid& grid) const;
};

// Applies the mechanism to a complete dataset. The baseline observation is
// never deleted.
LongitudinalDataset apply_missingness(const LongitudinalDataset& data,
                                      const MissingnessSpec& spec, std::uint64_t seed);

struct ImputationConfig {
  int M = 20;
  int max_em_iters = 500;
  double em_tol = 1e-6;
};

// Per-group multivariate-normal imputation: mean/covariance by EM on the
// observed data, parameter uncertainty propagated by refitting on a
// nonparametric bootstrap of subjects for each imputation, missing cells drawn
// from the conditional normal given the subject's observed cells.
std::vector<LongitudinalDataset> impute_mvn(const LongitudinalDataset& data,
                                            const ImputationConfig& cfg, std::uint64_t seed);

// EM estimate of the grid-vector mean and covariance from incomplete subject
// rows; exposed for tests.
struct MvnEstimate {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  int iterations = 0;
  bool converged = false;
};
MvnEstimate em_mvn(const std::vector<std::vector<int>>& obs_indices,
                   const std::vector<Eigen::VectorXd>& obs_values, int m,
                   const ImputationConfig& cfg);

}  // namespace wats
