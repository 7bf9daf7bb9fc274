#pragma once

namespace wats {

double norm_cdf(double z);
double norm_quantile(double p);

// Student-t CDF; df = +inf falls back to the normal.
double t_cdf(double x, double df);

// Chi-square upper tail P(X > x).
double chi2_sf(double x, double df);

}  // namespace wats
