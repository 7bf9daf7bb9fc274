#include "wats/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wats {

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, const NelderMeadOptions& opts) {
  const int n = static_cast<int>(x0.size());
  const double rho = 1.0, chi = 2.0, gamma = 0.5, sigma = 0.5;

  NelderMeadResult res;
  std::vector<Eigen::VectorXd> pts(n + 1, x0);
  std::vector<double> fv(n + 1);
  for (int i = 0; i < n; ++i) {
    double step = pts[i + 1][i] != 0.0 ? opts.init_step * std::abs(pts[i + 1][i])
                                       : opts.init_step_zero;
    pts[i + 1][i] += step;
  }
  for (int i = 0; i <= n; ++i) fv[i] = f(pts[i]);
  res.evaluations = n + 1;

  std::vector<int> order(n + 1);
  auto sort_simplex = [&]() {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return fv[a] < fv[b]; });
  };
  sort_simplex();

  for (res.iterations = 0; res.iterations < opts.max_iter; ++res.iterations) {
    const int best = order[0], worst = order[n], second = order[n - 1];
    if (std::abs(fv[worst] - fv[best]) <= opts.f_tol) {
      res.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i <= n; ++i) {
      if (i != worst) centroid += pts[i];
    }
    centroid /= n;

    Eigen::VectorXd xr = centroid + rho * (centroid - pts[worst]);
    double fr = f(xr);
    ++res.evaluations;

    if (fr < fv[order[0]]) {
      Eigen::VectorXd xe = centroid + chi * (xr - centroid);
      double fe = f(xe);
      ++res.evaluations;
      if (fe < fr) {
        pts[worst] = xe;
        fv[worst] = fe;
      } else {
        pts[worst] = xr;
        fv[worst] = fr;
      }
    } else if (fr < fv[second]) {
      pts[worst] = xr;
      fv[worst] = fr;
    } else {
      bool outside = fr < fv[worst];
      Eigen::VectorXd xc = outside ? centroid + gamma * (xr - centroid)
                                   : centroid - gamma * (centroid - pts[worst]);
      double fc = f(xc);
      ++res.evaluations;
      if (fc < (outside ? fr : fv[worst])) {
        pts[worst] = xc;
        fv[worst] = fc;
      } else {
        for (int i = 1; i <= n; ++i) {
          pts[order[i]] = pts[best] + sigma * (pts[order[i]] - pts[best]);
          fv[order[i]] = f(pts[order[i]]);
        }
        res.evaluations += n;
      }
    }
    sort_simplex();
    if (opts.record_trace) res.trace.push_back(fv[order[0]]);
  }

  sort_simplex();
  res.x = pts[order[0]];
  res.fmin = fv[order[0]];
  return res;
}

}  // namespace wats
