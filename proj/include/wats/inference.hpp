#pragma once

#include <span>
#include <string>

#include "wats/basis.hpp"
#include "wats/dataset.hpp"
#include "wats/lmm.hpp"
#include "wats/summaries.hpp"

namespace wats {

// Direction of the one-sided alternative for the (group1 - group2) effect.
// Lower: improvement means a more negative rate of change (HDRS-style,
// lower is better), the default throughout.
enum class Direction { Lower, Upper };

struct TestResult {
  double statistic = 0.0;
  double p_two_sided = 1.0;
  double p_one_sided = 0.5;
  std::string method;
  double df = 0.0;  // infinity = normal reference
  bool degenerate = false;
};

// Wald comparison of two mean-change estimates against the standard normal.
TestResult wald_mc_test(const SummaryEstimate& mc1, const SummaryEstimate& mc2,
                        Direction dir = Direction::Lower);

// Welch two-sample t on the per-subject change scores summarized by the
// estimates (variance = s^2/n), Welch-Satterthwaite degrees of freedom.
TestResult two_sample_t(const SummaryEstimate& cs1, const SummaryEstimate& cs2,
                        Direction dir = Direction::Lower);

TestResult ancova_test(const AncovaFit& fit, Direction dir = Direction::Lower);

// 2 (l_separate - l_pooled) against chi-square with the parameter-count
// difference as degrees of freedom.
TestResult lrt_groups(const LongitudinalDataset& data, const Basis& basis,
                      const LmmOptions& opts = {});

struct MIResult {
  int M = 0;
  std::vector<double> estimates;
  std::vector<double> variances;
  double pooled_estimate = 0.0;
  double within_variance = 0.0;
  double between_variance = 0.0;
  double pooled_variance = 0.0;
  double df_adj = 0.0;  // infinity when between-variance is zero
};

// Rubin's rules: pooled = mean, T = Wbar + (1 + 1/M) B.
MIResult rubin_pool(std::span<const double> estimates, std::span<const double> variances);

// pooled / sqrt(T) against t with Rubin's adjusted df.
TestResult mi_test(const MIResult& mi, Direction dir = Direction::Lower);

}  // namespace wats
