#include "wats/missing.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "wats/rng.hpp"

namespace wats {

MissingnessSpec MissingnessSpec::none() { return {}; }

MissingnessSpec MissingnessSpec::mcar(double rate) {
  MissingnessSpec s;
  s.mechanism = Mechanism::Mcar;
  s.rate = rate;
  return s;
}

MissingnessSpec MissingnessSpec::dropout(DropoutLaw law) {
  MissingnessSpec s;
  s.mechanism = Mechanism::Dropout;
  s.law = std::move(law);
  return s;
}

MissingnessSpec MissingnessSpec::mnar(double latent_sd, double cutoff) {
  MissingnessSpec s;
  s.mechanism = Mechanism::Mnar;
  s.latent_sd = latent_sd;
  s.cutoff = cutoff;
  return s;
}

std::string MissingnessSpec::describe() const {
  std::ostringstream os;
  switch (mechanism) {
    case Mechanism::None: os << "none"; break;
    case Mechanism::Mcar: os << "mcar(" << rate << ")"; break;
    case Mechanism::Dropout: os << "dropout"; break;
    case Mechanism::Mnar: os << "mnar(sd=" << latent_sd << ",cutoff=" << cutoff << ")"; break;
  }
  return os.str();
}

void MissingnessSpec::validate(const TimeGrid& grid) const {
  switch (mechanism) {
    case Mechanism::None:
      break;
    case Mechanism::Mcar:
      if (rate < 0.0 || rate > 1.0) throw SpecError("missingness: MCAR rate outside [0,1]");
      break;
    case Mechanism::Dropout:
      law.validate();
      if (static_cast<int>(law.probs.size()) != grid.size() - 1)
        throw SpecError("missingness: dropout law must cover t*_2..t*_m");
      break;
    case Mechanism::Mnar:
      if (!(latent_sd > 0.0)) throw SpecError("missingness: MNAR latent sd must be positive");
      break;
  }
}

LongitudinalDataset apply_missingness(const LongitudinalDataset& data,
                                      const MissingnessSpec& spec, std::uint64_t seed) {
  spec.validate(data.grid());
  if (spec.mechanism == MissingnessSpec::Mechanism::None) return data;
  if (!data.complete())
    throw ContractError("apply_missingness: input must be complete on the grid");

  const int m = data.grid().size();
  std::vector<SubjectRecord> out;
  out.reserve(data.subjects().size());

  for (std::size_t i = 0; i < data.subjects().size(); ++i) {
    const SubjectRecord& s = data.subjects()[i];
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(i)}));
    SubjectRecord rec;
    rec.id = s.id;
    rec.group = s.group;
    rec.times.push_back(s.times[0]);  // baseline is never deleted
    rec.values.push_back(s.values[0]);

    switch (spec.mechanism) {
      case MissingnessSpec::Mechanism::Mcar:
        for (int j = 1; j < m; ++j) {
          if (rng.uniform() >= spec.rate) {
            rec.times.push_back(s.times[j]);
            rec.values.push_back(s.values[j]);
          }
        }
        break;
      case MissingnessSpec::Mechanism::Dropout: {
        const int last = 1 + rng.categorical(spec.law.probs);
        for (int j = 1; j <= last; ++j) {
          rec.times.push_back(s.times[j]);
          rec.values.push_back(s.values[j]);
        }
        break;
      }
      case MissingnessSpec::Mechanism::Mnar:
        for (int j = 1; j < m; ++j) {
          const double z = spec.latent_sd * rng.normal();
          if (z < spec.cutoff) continue;
          rec.times.push_back(s.times[j]);
          rec.values.push_back(spec.mnar_perturb_values ? s.values[j] + z : s.values[j]);
        }
        break;
      default:
        break;
    }
    out.push_back(std::move(rec));
  }
  return LongitudinalDataset(data.grid(), data.group_labels(), std::move(out));
}

namespace {

struct ObsPattern {
  std::vector<int> obs;
  std::vector<int> mis;
  std::vector<int> members;  // positions into the group's subject list
};

std::vector<ObsPattern> group_patterns(const std::vector<std::vector<int>>& obs_indices, int m) {
  std::map<std::vector<int>, int> lookup;
  std::vector<ObsPattern> patterns;
  for (std::size_t i = 0; i < obs_indices.size(); ++i) {
    auto [it, fresh] = lookup.try_emplace(obs_indices[i], static_cast<int>(patterns.size()));
    if (fresh) {
      ObsPattern p;
      p.obs = obs_indices[i];
      std::vector<char> seen(m, 0);
      for (int j : p.obs) seen[j] = 1;
      for (int j = 0; j < m; ++j) {
        if (!seen[j]) p.mis.push_back(j);
      }
      patterns.push_back(std::move(p));
    }
    patterns[it->second].members.push_back(static_cast<int>(i));
  }
  return patterns;
}

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& S, const std::vector<int>& rows,
                          const std::vector<int>& cols) {
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < cols.size(); ++b) out(a, b) = S(rows[a], cols[b]);
  return out;
}

Eigen::VectorXd subvector(const Eigen::VectorXd& v, const std::vector<int>& idx) {
  Eigen::VectorXd out(idx.size());
  for (std::size_t a = 0; a < idx.size(); ++a) out[a] = v[idx[a]];
  return out;
}

}  // namespace

MvnEstimate em_mvn(const std::vector<std::vector<int>>& obs_indices,
                   const std::vector<Eigen::VectorXd>& obs_values, int m,
                   const ImputationConfig& cfg) {
  const int n = static_cast<int>(obs_indices.size());
  if (n < 2) throw DataError("em_mvn: need at least two subjects");

  // available-case start
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd count = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < obs_indices[i].size(); ++a) {
      mean[obs_indices[i][a]] += obs_values[i][a];
      count[obs_indices[i][a]] += 1.0;
    }
  }
  double overall = mean.sum() / std::max(count.sum(), 1.0);
  for (int j = 0; j < m; ++j) mean[j] = count[j] > 0 ? mean[j] / count[j] : overall;
  Eigen::VectorXd var = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < obs_indices[i].size(); ++a) {
      const double d = obs_values[i][a] - mean[obs_indices[i][a]];
      var[obs_indices[i][a]] += d * d;
    }
  }
  for (int j = 0; j < m; ++j) var[j] = count[j] > 1 ? var[j] / (count[j] - 1) : 1.0;
  Eigen::MatrixXd cov = var.cwiseMax(1e-4).asDiagonal();

  const std::vector<ObsPattern> patterns = group_patterns(obs_indices, m);

  MvnEstimate est;
  for (est.iterations = 1; est.iterations <= cfg.max_em_iters; ++est.iterations) {
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(m);
    Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(m, m);
    for (const ObsPattern& pat : patterns) {
      if (pat.mis.empty()) {
        for (int i : pat.members) {
          Eigen::VectorXd y(m);
          for (std::size_t a = 0; a < pat.obs.size(); ++a) y[pat.obs[a]] = obs_values[i][a];
          s1 += y;
          s2.noalias() += y * y.transpose();
        }
        continue;
      }
      Eigen::MatrixXd soo = submatrix(cov, pat.obs, pat.obs);
      Eigen::MatrixXd suo = submatrix(cov, pat.mis, pat.obs);
      Eigen::MatrixXd suu = submatrix(cov, pat.mis, pat.mis);
      Eigen::LDLT<Eigen::MatrixXd> ldlt(soo);
      Eigen::MatrixXd K = ldlt.solve(suo.transpose()).transpose();  // mis x obs
      Eigen::MatrixXd C = suu - K * suo.transpose();
      Eigen::VectorXd mu_o = subvector(mean, pat.obs);
      Eigen::VectorXd mu_u = subvector(mean, pat.mis);
      for (int i : pat.members) {
        Eigen::VectorXd fill = mu_u + K * (obs_values[i] - mu_o);
        Eigen::VectorXd y(m);
        for (std::size_t a = 0; a < pat.obs.size(); ++a) y[pat.obs[a]] = obs_values[i][a];
        for (std::size_t a = 0; a < pat.mis.size(); ++a) y[pat.mis[a]] = fill[a];
        s1 += y;
        s2.noalias() += y * y.transpose();
        for (std::size_t a = 0; a < pat.mis.size(); ++a)
          for (std::size_t b = 0; b < pat.mis.size(); ++b) s2(pat.mis[a], pat.mis[b]) += C(a, b);
      }
    }
    Eigen::VectorXd new_mean = s1 / n;
    Eigen::MatrixXd new_cov = s2 / n - new_mean * new_mean.transpose();
    new_cov = clip_to_psd(new_cov, 1e-8);

    const double delta = (new_mean - mean).cwiseAbs().maxCoeff() +
                         (new_cov - cov).cwiseAbs().maxCoeff();
    mean = std::move(new_mean);
    cov = std::move(new_cov);
    if (delta < cfg.em_tol) {
      est.converged = true;
      break;
    }
  }
  est.mean = std::move(mean);
  est.cov = std::move(cov);
  return est;
}

std::vector<LongitudinalDataset> impute_mvn(const LongitudinalDataset& data,
                                            const ImputationConfig& cfg, std::uint64_t seed) {
  if (cfg.M < 2) throw ContractError("impute_mvn: M must be >= 2");
  const int m = data.grid().size();

  std::vector<std::vector<SubjectRecord>> completed(
      cfg.M, std::vector<SubjectRecord>(data.subjects().size()));

  for (int k = 0; k < data.n_groups(); ++k) {
    const std::vector<int> rows = data.subject_indices(k);
    const int n = static_cast<int>(rows.size());
    std::vector<std::vector<int>> obs_indices(n);
    std::vector<Eigen::VectorXd> obs_values(n);
    for (int i = 0; i < n; ++i) {
      const SubjectRecord& s = data.subjects()[rows[i]];
      obs_indices[i].resize(s.n_obs());
      obs_values[i].resize(s.n_obs());
      for (int a = 0; a < s.n_obs(); ++a) {
        obs_indices[i][a] = data.grid().index_of(s.times[a]);
        obs_values[i][a] = s.values[a];
      }
    }

    for (int imp = 0; imp < cfg.M; ++imp) {
      // refresh parameter uncertainty with a bootstrap refit
      Rng boot_rng(derive_seed(seed, {static_cast<std::uint64_t>(k),
                                      static_cast<std::uint64_t>(imp), 0xb007ULL}));
      std::vector<std::vector<int>> boot_idx(n);
      std::vector<Eigen::VectorXd> boot_val(n);
      for (int i = 0; i < n; ++i) {
        const int pick = boot_rng.uniform_int(n);
        boot_idx[i] = obs_indices[pick];
        boot_val[i] = obs_values[pick];
      }
      MvnEstimate est = em_mvn(boot_idx, boot_val, m, cfg);
      if (!est.converged) {
        std::ostringstream os;
        os << "impute_mvn: EM did not converge within " << cfg.max_em_iters
           << " iterations (group " << k << ", imputation " << imp << ")";
        throw DataError(os.str());
      }

      for (int i = 0; i < n; ++i) {
        const SubjectRecord& src = data.subjects()[rows[i]];
        SubjectRecord rec;
        rec.id = src.id;
        rec.group = src.group;
        rec.times = data.grid().points();
        rec.values.assign(m, 0.0);
        std::vector<char> seen(m, 0);
        for (int a = 0; a < src.n_obs(); ++a) {
          rec.values[obs_indices[i][a]] = src.values[a];  // observed cells unchanged
          seen[obs_indices[i][a]] = 1;
        }
        std::vector<int> mis;
        for (int j = 0; j < m; ++j) {
          if (!seen[j]) mis.push_back(j);
        }
        if (!mis.empty()) {
          Rng draw_rng(derive_seed(seed, {static_cast<std::uint64_t>(k),
                                          static_cast<std::uint64_t>(imp),
                                          static_cast<std::uint64_t>(i) + 1}));
          Eigen::MatrixXd soo = submatrix(est.cov, obs_indices[i], obs_indices[i]);
          Eigen::MatrixXd suo = submatrix(est.cov, mis, obs_indices[i]);
          Eigen::MatrixXd suu = submatrix(est.cov, mis, mis);
          Eigen::LDLT<Eigen::MatrixXd> ldlt(soo);
          Eigen::MatrixXd K = ldlt.solve(suo.transpose()).transpose();
          Eigen::MatrixXd C = suu - K * suo.transpose();
          Eigen::VectorXd cond_mean = subvector(est.mean, mis) +
                                      K * (obs_values[i] - subvector(est.mean, obs_indices[i]));
          Eigen::VectorXd draw =
              cond_mean + psd_sqrt(C) * draw_rng.normal_vector(static_cast<int>(mis.size()));
          for (std::size_t a = 0; a < mis.size(); ++a) rec.values[mis[a]] = draw[a];
        }
        completed[imp][rows[i]] = std::move(rec);
      }
    }
  }

  std::vector<LongitudinalDataset> out;
  out.reserve(cfg.M);
  for (int imp = 0; imp < cfg.M; ++imp)
    out.emplace_back(data.grid(), data.group_labels(), std::move(completed[imp]));
  return out;
}

}  // namespace wats
