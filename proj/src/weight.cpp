#include "wats/weight.hpp"

#include <algorithm>
#include <cmath>

#include "wats/nelder_mead.hpp"
#include "wats/quadrature.hpp"
#include "wats/rng.hpp"

namespace wats {

namespace {

// Panels on which both bases are polynomial.
std::vector<double> merged_breaks(const Basis& a, const Basis& b) {
  std::vector<double> out = a.segment_breaks();
  out.insert(out.end(), b.segment_breaks().begin(), b.segment_breaks().end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// T_j = integral u u' g'_j dt for each trajectory-basis column; M_{w,beta} is
// their beta-weighted sum, so the optimizer only pays for quadratic forms.
struct SeparationProblem {
  std::vector<Eigen::MatrixXd> T;
  Eigen::MatrixXd dM;       // M1 - M2
  Eigen::MatrixXd cov_sum;  // Cov(beta1) + Cov(beta2)

  SeparationProblem(const Basis& u_basis, const Basis& traj_basis, const Eigen::VectorXd& dbeta,
                    const Eigen::MatrixXd& cov) {
    const int kw = u_basis.dim(), p = traj_basis.dim();
    const std::vector<double> breaks = merged_breaks(u_basis, traj_basis);
    T.reserve(p);
    for (int j = 0; j < p; ++j) {
      T.push_back(integrate_panels(
          [&](double t) -> Eigen::MatrixXd {
            Eigen::VectorXd u = u_basis.values(t);
            return (u * u.transpose()) * traj_basis.derivatives(t)[j];
          },
          breaks));
    }
    dM = Eigen::MatrixXd::Zero(kw, kw);
    for (int j = 0; j < p; ++j) dM += dbeta[j] * T[j];
    cov_sum = cov;
  }

  // (v' dM v)^2 / (S_w(v)' cov_sum S_w(v)); both forms quartic in v, so the
  // ratio is invariant under scaling of v.
  double objective(const Eigen::VectorXd& v) const {
    const double sep = v.dot(dM * v);
    Eigen::VectorXd s(static_cast<int>(T.size()));
    for (std::size_t j = 0; j < T.size(); ++j) s[j] = v.dot(T[j] * v);
    const double den = s.dot(cov_sum * s);
    if (!(den > 0.0)) return 0.0;
    return sep * sep / den;
  }
};

// Coefficients making (u'v)^2 constant: all-ones for a B-spline (partition of
// unity), the constant column for polynomials.
Eigen::VectorXd uniform_coefficients(const Basis& u_basis) {
  if (u_basis.spec().kind == BasisSpec::Kind::Polynomial) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(u_basis.dim());
    v[0] = 1.0;
    return v;
  }
  return Eigen::VectorXd::Ones(u_basis.dim());
}

double squared_integral(const Basis& u_basis, const Eigen::VectorXd& v) {
  return integrate_panels(
      [&](double t) {
        const double s = u_basis.values(t).dot(v);
        return s * s;
      },
      u_basis.segment_breaks());
}

// Unit norm with a canonical sign; the weight is unchanged.
Eigen::VectorXd canonicalize(Eigen::VectorXd v) {
  const double norm = v.norm();
  if (norm > 0.0) v /= norm;
  int arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v[arg] < 0.0) v = -v;
  return v;
}

}  // namespace

double WeightModel::weight(double t) const {
  const double s = u_basis.values(t).dot(v);
  return norm_const * s * s;
}

WeightModel uniform_weight_model(const BasisSpec& u_spec) {
  Basis u(u_spec);
  Eigen::VectorXd v = uniform_coefficients(u);
  const double integral = squared_integral(u, v);
  WeightModel model(std::move(u), std::move(v), 1.0 / integral);
  model.fallback_uniform = true;
  return model;
}

Eigen::VectorXd weight_slope_vector(const WeightModel& weight, const Basis& traj_basis) {
  const std::vector<double> breaks = merged_breaks(weight.u_basis, traj_basis);
  return integrate_panels(
      [&](double t) -> Eigen::VectorXd { return traj_basis.derivatives(t) * weight.weight(t); },
      breaks);
}

double wats_value(const WeightModel& weight, const Basis& traj_basis,
                  const Eigen::VectorXd& beta) {
  if (beta.size() != traj_basis.dim())
    throw ContractError("wats_value: beta does not match the basis dimension");
  return weight_slope_vector(weight, traj_basis).dot(beta);
}

WatsMatrices build_wats_matrices(const Basis& u_basis, const Basis& traj_basis,
                                 const Eigen::VectorXd& v, const Eigen::VectorXd& beta1,
                                 const Eigen::VectorXd& beta2, const Eigen::MatrixXd& cov1,
                                 const Eigen::MatrixXd& cov2) {
  const int p = traj_basis.dim();
  if (v.size() != u_basis.dim() || beta1.size() != p || beta2.size() != p ||
      cov1.rows() != p || cov2.rows() != p)
    throw ContractError("build_wats_matrices: dimension mismatch");

  const std::vector<double> breaks = merged_breaks(u_basis, traj_basis);
  auto moment = [&](const Eigen::VectorXd& beta) {
    return integrate_panels(
        [&](double t) -> Eigen::MatrixXd {
          Eigen::VectorXd u = u_basis.values(t);
          return (u * u.transpose()) * traj_basis.derivatives(t).dot(beta);
        },
        breaks);
  };

  WatsMatrices mats;
  mats.M1 = moment(beta1);
  mats.M2 = moment(beta2);
  mats.H = integrate_panels(
      [&](double t) -> Eigen::MatrixXd {
        Eigen::VectorXd u = u_basis.values(t);
        return (u * (u.dot(v))) * traj_basis.derivatives(t).transpose();
      },
      breaks);
  Eigen::MatrixXd d = mats.M1 - mats.M2;
  mats.A = d * v * v.transpose() * d.transpose();
  mats.B = mats.H * (cov1 + cov2) * mats.H.transpose();
  return mats;
}

double rayleigh_objective(const Basis& u_basis, const Basis& traj_basis, const Eigen::VectorXd& v,
                          const Eigen::VectorXd& beta1, const Eigen::VectorXd& beta2,
                          const Eigen::MatrixXd& cov1, const Eigen::MatrixXd& cov2) {
  SeparationProblem prob(u_basis, traj_basis, beta1 - beta2, cov1 + cov2);
  return prob.objective(v);
}

WeightModel optimize_weight(const LmmFit& fit1, const LmmFit& fit2, const Basis& traj_basis,
                            const BasisSpec& u_spec, std::uint64_t seed,
                            const WeightOptions& opts) {
  if (!fit1.converged || !fit2.converged)
    throw ContractError("optimize_weight: both fits must have converged");

  Basis u_basis(u_spec);
  const int kw = u_basis.dim();
  SeparationProblem prob(u_basis, traj_basis, fit1.beta - fit2.beta,
                         fit1.cov_beta + fit2.cov_beta);

  const Eigen::VectorXd v_uniform = uniform_coefficients(u_basis);
  const double uniform_obj = prob.objective(v_uniform);

  if (prob.dM.cwiseAbs().maxCoeff() == 0.0) {
    WeightModel model = uniform_weight_model(u_spec);
    model.objective = 0.0;
    return model;
  }

  auto neg = [&prob](const Eigen::VectorXd& v) { return -prob.objective(v); };
  NelderMeadOptions nm;
  nm.max_iter = opts.max_iter;
  nm.f_tol = opts.f_tol;

  Eigen::VectorXd best_v = v_uniform;
  double best_obj = uniform_obj;
  Rng rng(derive_seed(seed, {0x77ULL}));
  for (int s = 0; s <= opts.starts; ++s) {
    Eigen::VectorXd v0 = s == 0 ? v_uniform : canonicalize(rng.normal_vector(kw));
    NelderMeadResult res = nelder_mead(neg, v0, nm);
    if (-res.fmin > best_obj) {
      best_obj = -res.fmin;
      best_v = res.x;
    }
  }

  if (!(best_obj > uniform_obj)) {
    WeightModel model = uniform_weight_model(u_spec);
    model.objective = uniform_obj;
    return model;
  }

  Eigen::VectorXd v = canonicalize(best_v);
  const double integral = squared_integral(u_basis, v);
  if (!(integral > 0.0)) {
    WeightModel model = uniform_weight_model(u_spec);
    model.objective = uniform_obj;
    return model;
  }
  WeightModel model(std::move(u_basis), std::move(v), 1.0 / integral);
  model.objective = best_obj;
  return model;
}

double individual_wats(const WeightModel& weight, const Basis& traj_basis, const LmmFit& fit,
                       int subject_pos) {
  if (subject_pos < 0 || subject_pos >= fit.n_subjects())
    throw ContractError("individual_wats: subject index out of range");
  Eigen::VectorXd coef = individual_coefficients(fit, fit.blups[subject_pos]);
  return weight_slope_vector(weight, traj_basis).dot(coef);
}

}  // namespace wats
