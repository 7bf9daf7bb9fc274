#include "wats/inference.hpp"

#include <cmath>
#include <limits>

#include "wats/stats.hpp"

namespace wats {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// pOneSided = pTwoSided/2 when the observed effect points in the hypothesized
// direction, 1 - pTwoSided/2 otherwise.
double one_sided(double p_two, double effect, Direction dir) {
  const bool in_direction = dir == Direction::Lower ? effect <= 0.0 : effect >= 0.0;
  return in_direction ? 0.5 * p_two : 1.0 - 0.5 * p_two;
}

TestResult degenerate_infinite(double effect, Direction dir, const std::string& method,
                               double df) {
  TestResult r;
  r.statistic = effect > 0 ? kInf : -kInf;
  r.p_two_sided = 0.0;
  r.p_one_sided = one_sided(0.0, effect, dir);
  r.method = method;
  r.df = df;
  r.degenerate = true;
  return r;
}

}  // namespace

TestResult wald_mc_test(const SummaryEstimate& mc1, const SummaryEstimate& mc2, Direction dir) {
  const double diff = mc1.value - mc2.value;
  const double var = mc1.variance + mc2.variance;
  TestResult r;
  r.method = "wald-mc";
  r.df = kInf;
  if (var <= 0.0) {
    if (diff != 0.0) throw NumericError("wald_mc_test: zero variance with nonzero difference");
    r.statistic = 0.0;
    r.p_two_sided = 1.0;
    r.p_one_sided = 0.5;
    return r;
  }
  r.statistic = diff / std::sqrt(var);
  r.p_two_sided = 2.0 * norm_cdf(-std::abs(r.statistic));
  r.p_one_sided = one_sided(r.p_two_sided, diff, dir);
  return r;
}

TestResult two_sample_t(const SummaryEstimate& cs1, const SummaryEstimate& cs2, Direction dir) {
  if (cs1.n < 2 || cs2.n < 2) throw ContractError("two_sample_t: need n >= 2 per group");
  const double diff = cs1.value - cs2.value;
  const double var = cs1.variance + cs2.variance;
  if (var <= 0.0) {
    if (diff == 0.0) throw NumericError("two_sample_t: zero variance in both groups");
    return degenerate_infinite(diff, dir, "welch-t", kInf);
  }
  // Welch-Satterthwaite on the standard-error components s_k^2 / n_k
  const double df = var * var / (cs1.variance * cs1.variance / (cs1.n - 1) +
                                 cs2.variance * cs2.variance / (cs2.n - 1));
  TestResult r;
  r.method = "welch-t";
  r.df = df;
  r.statistic = diff / std::sqrt(var);
  r.p_two_sided = 2.0 * t_cdf(-std::abs(r.statistic), df);
  r.p_one_sided = one_sided(r.p_two_sided, diff, dir);
  return r;
}

TestResult ancova_test(const AncovaFit& fit, Direction dir) {
  TestResult r;
  r.method = "ancova-t";
  r.df = fit.df;
  if (fit.se2 <= 0.0) {
    if (fit.alpha2 == 0.0) {
      r.statistic = 0.0;
      r.p_two_sided = 1.0;
      r.p_one_sided = 0.5;
      return r;
    }
    return degenerate_infinite(fit.alpha2, dir, "ancova-t", fit.df);
  }
  r.statistic = fit.alpha2 / std::sqrt(fit.se2);
  r.p_two_sided = 2.0 * t_cdf(-std::abs(r.statistic), fit.df);
  r.p_one_sided = one_sided(r.p_two_sided, fit.alpha2, dir);
  return r;
}

TestResult lrt_groups(const LongitudinalDataset& data, const Basis& basis,
                      const LmmOptions& opts) {
  const int K = data.n_groups();
  if (K < 2) throw ContractError("lrt_groups: need at least two groups");
  const double l_sep = loglik_joint(data, basis, false, opts);
  const double l_pool = loglik_joint(data, basis, true, opts);
  double stat = 2.0 * (l_sep - l_pool);

  const int p = basis.dim();
  const int p_r = opts.random_dim > 0 ? opts.random_dim : std::min(p, 3);
  const int df = (K - 1) * (p + p_r * (p_r + 1) / 2 + 1);

  TestResult r;
  r.method = "lrt";
  r.df = df;
  r.degenerate = stat < -1e-6;  // optimizer failed to nest the models
  if (stat < 0.0) stat = 0.0;
  r.statistic = stat;
  r.p_two_sided = chi2_sf(stat, df);
  r.p_one_sided = r.p_two_sided;
  return r;
}

MIResult rubin_pool(std::span<const double> estimates, std::span<const double> variances) {
  const int M = static_cast<int>(estimates.size());
  if (M < 2 || variances.size() != estimates.size())
    throw ContractError("rubin_pool: need M >= 2 matched estimates and variances");
  MIResult mi;
  mi.M = M;
  mi.estimates.assign(estimates.begin(), estimates.end());
  mi.variances.assign(variances.begin(), variances.end());
  double qbar = 0.0, wbar = 0.0;
  for (int m = 0; m < M; ++m) {
    qbar += estimates[m];
    wbar += variances[m];
  }
  qbar /= M;
  wbar /= M;
  double b = 0.0;
  for (int m = 0; m < M; ++m) b += (estimates[m] - qbar) * (estimates[m] - qbar);
  b /= (M - 1);

  mi.pooled_estimate = qbar;
  mi.within_variance = wbar;
  mi.between_variance = b;
  mi.pooled_variance = wbar + (1.0 + 1.0 / M) * b;
  if (b > 0.0) {
    const double ratio = wbar / ((1.0 + 1.0 / M) * b);
    mi.df_adj = (M - 1) * (1.0 + ratio) * (1.0 + ratio);
  } else {
    mi.df_adj = kInf;
  }
  return mi;
}

TestResult mi_test(const MIResult& mi, Direction dir) {
  TestResult r;
  r.method = "mi-t";
  r.df = mi.df_adj;
  if (mi.pooled_variance <= 0.0) {
    if (mi.pooled_estimate == 0.0) {
      r.statistic = 0.0;
      r.p_two_sided = 1.0;
      r.p_one_sided = 0.5;
      return r;
    }
    return degenerate_infinite(mi.pooled_estimate, dir, "mi-t", mi.df_adj);
  }
  r.statistic = mi.pooled_estimate / std::sqrt(mi.pooled_variance);
  r.p_two_sided = 2.0 * t_cdf(-std::abs(r.statistic), mi.df_adj);
  r.p_one_sided = one_sided(r.p_two_sided, mi.pooled_estimate, dir);
  return r;
}

}  // namespace wats
