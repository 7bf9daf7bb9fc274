#include "wats/rng.hpp"

namespace wats {

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  Eigen::VectorXd lam = es.eigenvalues();
  for (int i = 0; i < lam.size(); ++i) lam[i] = lam[i] > 0.0 ? std::sqrt(lam[i]) : 0.0;
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd clip_to_psd(const Eigen::MatrixXd& m, double min_eigenvalue) {
  Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  Eigen::VectorXd lam = es.eigenvalues();
  bool dirty = false;
  for (int i = 0; i < lam.size(); ++i) {
    if (lam[i] < min_eigenvalue) {
      lam[i] = min_eigenvalue;
      dirty = true;
    }
  }
  if (!dirty) return sym;
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace wats
