#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "wats/dataset.hpp"
#include "wats/lmm.hpp"

namespace wats {

enum class SummaryKind { CS, MC, Slope, AncovaEffect };

// One scalar trajectory summary with its variance.
struct SummaryEstimate {
  SummaryKind kind = SummaryKind::CS;
  double value = 0.0;
  double variance = 0.0;
  int n = 0;         // subjects used
  int excluded = 0;  // subjects dropped (e.g. single observation)
};

// Mean of per-subject (last - first) / elapsed, each subject using its own
// last available observation. Variance is the sample variance of the
// per-subject slopes divided by n.
SummaryEstimate change_score(const LongitudinalDataset& data, int group);

// The per-subject slopes behind change_score; used by MI pooling and the
// density outputs.
std::vector<double> subject_change_scores(const LongitudinalDataset& data, int group);

// G' beta with variance G' Cov(beta) G.
SummaryEstimate mean_change(const LmmFit& fit, const Eigen::VectorXd& G);

// Fixed slope of a random-intercept/random-slope straight-line fit.
SummaryEstimate straight_line_slope(const LongitudinalDataset& data, int group,
                                    const LmmOptions& opts = {});

struct AncovaFit {
  double alpha0 = 0.0;
  double alpha1 = 0.0;  // NaN when the baseline column was dropped
  double alpha2 = 0.0;  // adjusted group effect
  double se2 = 0.0;     // squared standard error of alpha2
  int df = 0;
  int n = 0;
  bool baseline_dropped = false;
};

// OLS of the final design-time outcome on baseline and group indicator over
// subjects observing both; requires exactly two groups.
AncovaFit ancova(const LongitudinalDataset& data);

// (1/n) h' V h with h = (-1, 0, ..., 0, 1) / (t*_m - t*_1).
double var_cs_theoretical(const Eigen::MatrixXd& V, const TimeGrid& grid, int n_k);

// (1/n) G' (sigma2 (X*'X*)^-1 + D) G for the complete balanced design.
double var_mc_theoretical(const Eigen::MatrixXd& D, double sigma2,
                          const Eigen::MatrixXd& Xstar, const Eigen::VectorXd& G, int n_k);

// sum_j p_j (mu(t*_j) - mu(t*_1)) / (t*_j - t*_1).
double expected_cs_under_dropout(const std::function<double(double)>& mu,
                                 const TimeGrid& grid, const DropoutLaw& law);

}  // namespace wats
