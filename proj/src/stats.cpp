#include "wats/stats.hpp"

#include <cmath>
#include <limits>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace wats {

double norm_cdf(double z) { return 0.5 * std::erfc(-z / 1.4142135623730951); }

double norm_quantile(double p) {
  boost::math::normal_distribution<double> n;
  return boost::math::quantile(n, p);
}

double t_cdf(double x, double df) {
  if (!std::isfinite(df) || df > 1e8) return norm_cdf(x);
  boost::math::students_t_distribution<double> t(df);
  return boost::math::cdf(t, x);
}

double chi2_sf(double x, double df) {
  if (x <= 0.0) return 1.0;
  boost::math::chi_squared_distribution<double> c(df);
  return boost::math::cdf(boost::math::complement(c, x));
}

}  // namespace wats
