#include "wats/summaries.hpp"

#include <cmath>
#include <limits>

namespace wats {

std::vector<double> subject_change_scores(const LongitudinalDataset& data, int group) {
  std::vector<double> slopes;
  for (int row : data.subject_indices(group)) {
    const SubjectRecord& s = data.subjects()[row];
    if (s.n_obs() < 2) continue;
    slopes.push_back((s.values.back() - s.values.front()) /
                     (s.times.back() - s.times.front()));
  }
  return slopes;
}

SummaryEstimate change_score(const LongitudinalDataset& data, int group) {
  SummaryEstimate est;
  est.kind = SummaryKind::CS;
  std::vector<double> slopes = subject_change_scores(data, group);
  est.excluded = data.group_size(group) - static_cast<int>(slopes.size());
  est.n = static_cast<int>(slopes.size());
  if (est.n == 0) throw DataError("change_score: no subject has two observations");
  double mean = 0.0;
  for (double s : slopes) mean += s;
  mean /= est.n;
  double ss = 0.0;
  for (double s : slopes) ss += (s - mean) * (s - mean);
  est.value = mean;
  est.variance = est.n > 1 ? ss / (est.n - 1) / est.n : 0.0;
  return est;
}

SummaryEstimate mean_change(const LmmFit& fit, const Eigen::VectorXd& G) {
  if (G.size() != fit.beta.size())
    throw ContractError("mean_change: G does not match the basis dimension");
  SummaryEstimate est;
  est.kind = SummaryKind::MC;
  est.value = G.dot(fit.beta);
  est.variance = G.dot(fit.cov_beta * G);
  est.n = fit.n_subjects();
  return est;
}

SummaryEstimate straight_line_slope(const LongitudinalDataset& data, int group,
                                    const LmmOptions& opts) {
  Basis line(BasisSpec::polynomial(1, data.grid().first(), data.grid().last()));
  LmmOptions o = opts;
  o.random_dim = 2;
  LmmFit fit = fit_lmm_group(data, group, line, o);
  SummaryEstimate est;
  est.kind = SummaryKind::Slope;
  est.value = fit.beta[1];
  est.variance = fit.cov_beta(1, 1);
  est.n = fit.n_subjects();
  return est;
}

AncovaFit ancova(const LongitudinalDataset& data) {
  if (data.n_groups() != 2) throw ContractError("ancova: exactly two groups required");
  const double t_last = data.grid().last();

  std::vector<double> baseline, last, group;
  for (const SubjectRecord& s : data.subjects()) {
    if (s.times.back() != t_last) continue;  // complete-record rule
    baseline.push_back(s.values.front());
    last.push_back(s.values.back());
    group.push_back(static_cast<double>(s.group));
  }
  const int n = static_cast<int>(last.size());
  if (n < 4) throw DataError("ancova: fewer than four subjects with baseline and final outcome");

  double bmean = 0.0;
  for (double b : baseline) bmean += b;
  bmean /= n;
  double bvar = 0.0;
  for (double b : baseline) bvar += (b - bmean) * (b - bmean);
  const bool drop_baseline = bvar <= 1e-12 * std::max(1.0, bmean * bmean) * n;

  const int q = drop_baseline ? 2 : 3;
  Eigen::MatrixXd X(n, q);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    if (drop_baseline) {
      X(i, 1) = group[i];
    } else {
      X(i, 1) = baseline[i];
      X(i, 2) = group[i];
    }
    y[i] = last[i];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < q) throw NumericError("ancova: design matrix is rank deficient");
  Eigen::VectorXd alpha = qr.solve(y);
  const int df = n - q;
  if (df < 1) throw DataError("ancova: no residual degrees of freedom");
  const double sigma2 = (y - X * alpha).squaredNorm() / df;
  Eigen::MatrixXd xtx_inv =
      (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(q, q));

  AncovaFit fit;
  fit.baseline_dropped = drop_baseline;
  fit.alpha0 = alpha[0];
  fit.alpha1 = drop_baseline ? std::numeric_limits<double>::quiet_NaN() : alpha[1];
  fit.alpha2 = alpha[q - 1];
  fit.se2 = sigma2 * xtx_inv(q - 1, q - 1);
  fit.df = df;
  fit.n = n;
  return fit;
}

double var_cs_theoretical(const Eigen::MatrixXd& V, const TimeGrid& grid, int n_k) {
  const int m = grid.size();
  if (V.rows() != m || V.cols() != m)
    throw ContractError("var_cs_theoretical: V does not match the grid");
  const double span = grid.last() - grid.first();
  // h has only two nonzero entries
  const double h = 1.0 / span;
  return (V(0, 0) + V(m - 1, m - 1) - 2.0 * V(0, m - 1)) * h * h / n_k;
}

double var_mc_theoretical(const Eigen::MatrixXd& D, double sigma2, const Eigen::MatrixXd& Xstar,
                          const Eigen::VectorXd& G, int n_k) {
  const int p = static_cast<int>(G.size());
  if (Xstar.cols() != p || D.rows() != p || D.cols() != p)
    throw ContractError("var_mc_theoretical: dimension mismatch");
  Eigen::MatrixXd xtx = Xstar.transpose() * Xstar;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xtx);
  if (qr.rank() < p) throw NumericError("var_mc_theoretical: X*'X* is singular");
  return (sigma2 * G.dot(qr.solve(G)) + G.dot(D * G)) / n_k;
}

double expected_cs_under_dropout(const std::function<double(double)>& mu, const TimeGrid& grid,
                                 const DropoutLaw& law) {
  law.validate();
  if (static_cast<int>(law.probs.size()) != grid.size() - 1)
    throw ContractError("expected_cs_under_dropout: law does not cover t*_2..t*_m");
  const double t1 = grid.first();
  const double mu1 = mu(t1);
  double acc = 0.0;
  for (int j = 1; j < grid.size(); ++j)
    acc += law.probs[j - 1] * (mu(grid[j]) - mu1) / (grid[j] - t1);
  return acc;
}

}  // namespace wats
