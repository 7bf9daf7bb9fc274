#include "wats/lmm.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "wats/nelder_mead.hpp"
#include "wats/rng.hpp"

namespace wats {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;
constexpr double kSigma2Floor = 1e-12;
constexpr double kBadObjective = 1e30;

int default_random_dim(int p, const LmmOptions& opts) {
  if (opts.random_dim > 0) {
    if (opts.random_dim > p) throw ContractError("fit_lmm: random_dim exceeds basis dimension");
    return opts.random_dim;
  }
  return std::min(p, 3);
}

// Subjects sharing an observation-time pattern share X, V and V^-1; the
// likelihood only needs per-pattern counts and the sufficient statistics
// sum(y) and sum(y y'), which makes the objective cost independent of n.
struct Pattern {
  Eigen::MatrixXd X;      // m_p x p
  Eigen::VectorXd sum_y;  // m_p
  Eigen::MatrixXd sum_yy; // m_p x m_p
  int count = 0;
  std::vector<int> subjects;  // dataset rows

  // workspace reused across objective evaluations
  mutable Eigen::MatrixXd V, ViX, ViS;
  mutable Eigen::VectorXd ViY;
};

struct GroupData {
  std::vector<Pattern> patterns;
  std::vector<int> subject_index;
  long n_obs = 0;
  int p = 0;
  int p_r = 0;
};

GroupData collect_group(const LongitudinalDataset& data, const std::vector<int>& subjects,
                        const Basis& basis, int p_r) {
  GroupData g;
  g.p = basis.dim();
  g.p_r = p_r;
  g.subject_index = subjects;
  std::map<std::vector<int>, int> lookup;
  for (int row : subjects) {
    const SubjectRecord& s = data.subjects()[row];
    std::vector<int> key(s.times.size());
    for (std::size_t j = 0; j < s.times.size(); ++j) key[j] = data.grid().index_of(s.times[j]);
    auto [it, fresh] = lookup.try_emplace(key, static_cast<int>(g.patterns.size()));
    if (fresh) {
      Pattern pat;
      pat.X = eval_design(basis, s.times);
      const int m = pat.X.rows();
      pat.sum_y = Eigen::VectorXd::Zero(m);
      pat.sum_yy = Eigen::MatrixXd::Zero(m, m);
      pat.V.resize(m, m);
      pat.ViX.resize(m, g.p);
      pat.ViS.resize(m, m);
      pat.ViY.resize(m);
      g.patterns.push_back(std::move(pat));
    }
    Pattern& pat = g.patterns[it->second];
    Eigen::Map<const Eigen::VectorXd> y(s.values.data(), s.values.size());
    pat.sum_y += y;
    pat.sum_yy.noalias() += y * y.transpose();
    pat.count += 1;
    pat.subjects.push_back(row);
    g.n_obs += s.n_obs();
  }
  return g;
}

// theta = (row-wise lower triangle of chol(D) with log diagonal, log sigma2)
int n_variance_params(int p_r) { return p_r * (p_r + 1) / 2 + 1; }

Eigen::MatrixXd chol_from_theta(const Eigen::VectorXd& theta, int p_r) {
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(p_r, p_r);
  int k = 0;
  for (int i = 0; i < p_r; ++i) {
    for (int j = 0; j < i; ++j) L(i, j) = theta[k++];
    L(i, i) = std::exp(std::clamp(theta[k++], -40.0, 40.0));
  }
  return L;
}

Eigen::VectorXd theta_from(const Eigen::MatrixXd& D0, double sigma2_0, int p_r) {
  Eigen::MatrixXd Dsafe = clip_to_psd(D0, 1e-6);
  Eigen::LLT<Eigen::MatrixXd> llt(Dsafe);
  Eigen::MatrixXd L = llt.matrixL();
  Eigen::VectorXd theta(n_variance_params(p_r) + 0);
  int k = 0;
  for (int i = 0; i < p_r; ++i) {
    for (int j = 0; j < i; ++j) theta[k++] = L(i, j);
    theta[k++] = std::log(std::max(L(i, i), 1e-6));
  }
  theta[k] = std::log(std::max(sigma2_0, 1e-8));
  return theta;
}

struct Evaluation {
  bool ok = false;
  double neg_loglik = kBadObjective;
  Eigen::VectorXd beta;
  Eigen::MatrixXd A;  // sum X' V^-1 X
  Eigen::MatrixXd D;
  double sigma2 = 0.0;
};

class MarginalObjective {
 public:
  explicit MarginalObjective(const GroupData& g) : g_(g) {}

  int ridge_events() const { return ridge_events_; }

  Evaluation evaluate(const Eigen::VectorXd& theta) const {
    Evaluation ev;
    const int p = g_.p, p_r = g_.p_r;
    Eigen::MatrixXd L = chol_from_theta(theta, p_r);
    double sigma2 =
        std::max(std::exp(std::clamp(theta[theta.size() - 1], -40.0, 40.0)), kSigma2Floor);
    Eigen::MatrixXd D = L * L.transpose();

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(p);
    double quad = 0.0, logdet = 0.0;

    for (const Pattern& pat : g_.patterns) {
      const auto Z = pat.X.leftCols(p_r);
      pat.V.noalias() = Z * D * Z.transpose();
      pat.V.diagonal().array() += sigma2;
      Eigen::LLT<Eigen::MatrixXd> llt(pat.V);
      if (llt.info() != Eigen::Success) {
        // repair by inflating D's Cholesky diagonal
        ++ridge_events_;
        Eigen::MatrixXd Lr = L;
        Lr.diagonal().array() += 1e-8;
        Eigen::MatrixXd Dr = Lr * Lr.transpose();
        pat.V.noalias() = Z * Dr * Z.transpose();
        pat.V.diagonal().array() += sigma2 + 1e-10;
        llt.compute(pat.V);
        if (llt.info() != Eigen::Success) return ev;
      }
      pat.ViX.noalias() = llt.solve(pat.X);
      pat.ViY.noalias() = llt.solve(pat.sum_y);
      pat.ViS.noalias() = llt.solve(pat.sum_yy);
      A.noalias() += pat.count * (pat.X.transpose() * pat.ViX);
      r.noalias() += pat.X.transpose() * pat.ViY;
      quad += pat.ViS.trace();
      double ld = 0.0;
      for (int i = 0; i < pat.V.rows(); ++i) ld += std::log(llt.matrixLLT()(i, i));
      logdet += pat.count * 2.0 * ld;
    }

    Eigen::LLT<Eigen::MatrixXd> alt(A);
    if (alt.info() != Eigen::Success) return ev;
    Eigen::VectorXd beta = alt.solve(r);
    quad += -2.0 * beta.dot(r) + beta.dot(A * beta);

    ev.ok = true;
    ev.neg_loglik = 0.5 * (g_.n_obs * kLog2Pi + logdet + quad);
    if (!std::isfinite(ev.neg_loglik)) {
      ev.ok = false;
      ev.neg_loglik = kBadObjective;
      return ev;
    }
    ev.beta = std::move(beta);
    ev.A = std::move(A);
    ev.D = std::move(D);
    ev.sigma2 = sigma2;
    return ev;
  }

  double operator()(const Eigen::VectorXd& theta) const { return evaluate(theta).neg_loglik; }

 private:
  const GroupData& g_;
  mutable int ridge_events_ = 0;
};

// Moment start: sigma2 from pooled per-subject OLS residuals, D from the
// sample covariance of the per-subject OLS coefficients.
Eigen::VectorXd initial_theta(const LongitudinalDataset& data, const GroupData& g) {
  const int p = g.p, p_r = g.p_r;
  double rss = 0.0;
  long dof = 0;
  std::vector<Eigen::VectorXd> coefs;
  for (const Pattern& pat : g.patterns) {
    if (pat.X.rows() < p) continue;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(pat.X);
    if (qr.rank() < p) continue;
    for (int row : pat.subjects) {
      const SubjectRecord& s = data.subjects()[row];
      Eigen::Map<const Eigen::VectorXd> y(s.values.data(), s.values.size());
      Eigen::VectorXd c = qr.solve(y);
      coefs.push_back(c);
      if (pat.X.rows() > p) {
        rss += (y - pat.X * c).squaredNorm();
        dof += pat.X.rows() - p;
      }
    }
  }
  double sigma2_0 = dof > 0 ? rss / double(dof) : 0.0;
  if (!(sigma2_0 > 0.0)) sigma2_0 = 1e-4;

  Eigen::MatrixXd D0 = Eigen::MatrixXd::Identity(p_r, p_r) * 0.1;
  if (coefs.size() >= 2) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
    for (const auto& c : coefs) mean += c;
    mean /= double(coefs.size());
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(p, p);
    for (const auto& c : coefs) cov.noalias() += (c - mean) * (c - mean).transpose();
    cov /= double(coefs.size() - 1);
    D0 = cov.topLeftCorner(p_r, p_r);
  }
  return theta_from(D0, sigma2_0, p_r);
}

LmmFit fit_group(const LongitudinalDataset& data, const std::vector<int>& subjects,
                 const Basis& basis, const LmmOptions& opts) {
  if (subjects.size() < 2) throw DataError("fit_lmm: group has fewer than two subjects");
  const int p_r = default_random_dim(basis.dim(), opts);
  GroupData g = collect_group(data, subjects, basis, p_r);

  long n_params = basis.dim() + n_variance_params(p_r);
  if (g.n_obs <= n_params)
    throw DataError("fit_lmm: not enough observations to identify the model");

  MarginalObjective obj(g);
  NelderMeadOptions nm;
  nm.max_iter = opts.max_iter;
  nm.f_tol = opts.f_tol;
  nm.record_trace = true;

  NelderMeadResult best = nelder_mead(std::cref(obj), initial_theta(data, g), nm);
  std::vector<double> trace = std::move(best.trace);
  for (int r = 0; r < opts.restarts; ++r) {
    NelderMeadResult polish = nelder_mead(std::cref(obj), best.x, nm);
    trace.insert(trace.end(), polish.trace.begin(), polish.trace.end());
    if (polish.fmin <= best.fmin) {
      polish.trace.clear();
      best = std::move(polish);
    }
  }

  Evaluation ev = obj.evaluate(best.x);
  if (!ev.ok) throw NumericError("fit_lmm: likelihood evaluation failed at the optimum");

  LmmFit fit;
  fit.beta = ev.beta;
  fit.D = ev.D;
  fit.sigma2 = ev.sigma2;
  Eigen::LLT<Eigen::MatrixXd> alt(ev.A);
  fit.cov_beta = alt.solve(Eigen::MatrixXd::Identity(g.p, g.p));
  fit.loglik = -ev.neg_loglik;
  fit.converged = best.converged;
  fit.n_obs = static_cast<int>(g.n_obs);
  fit.ridge_events = obj.ridge_events();
  fit.trace = std::move(trace);

  // BLUPs: b_i = D Z' V^-1 (y_i - X beta), V and X shared within a pattern
  std::vector<std::pair<int, Eigen::VectorXd>> blups;
  for (const Pattern& pat : g.patterns) {
    const auto Z = pat.X.leftCols(p_r);
    pat.V.noalias() = Z * fit.D * Z.transpose();
    pat.V.diagonal().array() += fit.sigma2;
    Eigen::LLT<Eigen::MatrixXd> llt(pat.V);
    Eigen::VectorXd fitted = pat.X * fit.beta;
    for (int row : pat.subjects) {
      const SubjectRecord& s = data.subjects()[row];
      Eigen::Map<const Eigen::VectorXd> y(s.values.data(), s.values.size());
      Eigen::VectorXd b = fit.D * Z.transpose() * llt.solve(y - fitted);
      blups.emplace_back(row, std::move(b));
    }
  }
  std::sort(blups.begin(), blups.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [row, b] : blups) {
    fit.subject_index.push_back(row);
    fit.blups.push_back(std::move(b));
  }
  return fit;
}

}  // namespace

std::vector<LmmFit> fit_lmm(const LongitudinalDataset& data, const Basis& basis,
                            const LmmOptions& opts) {
  std::vector<LmmFit> fits;
  fits.reserve(data.n_groups());
  for (int k = 0; k < data.n_groups(); ++k)
    fits.push_back(fit_group(data, data.subject_indices(k), basis, opts));
  return fits;
}

LmmFit fit_lmm_group(const LongitudinalDataset& data, int group, const Basis& basis,
                     const LmmOptions& opts) {
  return fit_group(data, data.subject_indices(group), basis, opts);
}

Eigen::VectorXd blup(const LmmFit& fit, const Basis& basis, const SubjectRecord& subject) {
  const int p_r = fit.random_dim();
  Eigen::MatrixXd X = eval_design(basis, subject.times);
  const auto Z = X.leftCols(p_r);
  Eigen::MatrixXd V = Z * fit.D * Z.transpose();
  V.diagonal().array() += fit.sigma2;
  Eigen::Map<const Eigen::VectorXd> y(subject.values.data(), subject.values.size());
  return fit.D * Z.transpose() * V.llt().solve(y - X * fit.beta);
}

Eigen::VectorXd individual_coefficients(const LmmFit& fit, const Eigen::VectorXd& b) {
  Eigen::VectorXd coef = fit.beta;
  coef.head(b.size()) += b;
  return coef;
}

double loglik_joint(const LongitudinalDataset& data, const Basis& basis, bool pooled,
                    const LmmOptions& opts) {
  if (pooled) {
    std::vector<int> all(data.subjects().size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    return fit_group(data, all, basis, opts).loglik;
  }
  double total = 0.0;
  for (const LmmFit& fit : fit_lmm(data, basis, opts)) total += fit.loglik;
  return total;
}

}  // namespace wats
