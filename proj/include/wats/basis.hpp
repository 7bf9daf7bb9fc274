#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wats/error.hpp"

namespace wats {

// The common design times t*_1 < ... < t*_m shared by all subjects.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> points);

  int size() const { return static_cast<int>(points_.size()); }
  double operator[](int j) const { return points_[j]; }
  double first() const { return points_.front(); }
  double last() const { return points_.back(); }
  const std::vector<double>& points() const { return points_; }

  // Exact-match index of a design time, -1 if absent.
  int index_of(double t) const;

 private:
  std::vector<double> points_;
};

struct BasisSpec {
  enum class Kind { Polynomial, CubicBspline };

  Kind kind = Kind::Polynomial;
  int degree = 2;                       // polynomial only
  std::vector<double> interior_knots;   // B-spline only
  double lo = 0.0;
  double hi = 7.0;

  static BasisSpec polynomial(int degree, double lo, double hi);
  static BasisSpec cubic_bspline(std::vector<double> interior_knots, double lo, double hi);
  // Single interior knot at the midpoint of the domain.
  static BasisSpec default_bspline(double lo, double hi);

  int dimension() const;
  std::string describe() const;
};

// Evaluable basis system g(t): values, first derivatives, and the panel
// breakpoints that make every integrand piecewise-polynomial.
class Basis {
 public:
  explicit Basis(BasisSpec spec);

  int dim() const { return dim_; }
  double lo() const { return spec_.lo; }
  double hi() const { return spec_.hi; }
  const BasisSpec& spec() const { return spec_; }

  Eigen::VectorXd values(double t) const;
  Eigen::VectorXd derivatives(double t) const;

  // Domain endpoints plus interior knots; quadrature panels.
  const std::vector<double>& segment_breaks() const { return breaks_; }

 private:
  void check_domain(double t) const;

  BasisSpec spec_;
  int dim_;
  std::vector<double> breaks_;
  std::vector<double> knots_;  // clamped knot vector (B-spline only)
};

// Rows g(times_i)^T; throws DomainError for times outside [lo, hi].
Eigen::MatrixXd eval_design(const Basis& basis, std::span<const double> times);

// S_w: componentwise integral of w(t) g'_j(t) over the domain.
Eigen::VectorXd weighted_slope_integral(const Basis& basis,
                                        const std::function<double(double)>& weight);

// G = (g(t*_m) - g(t*_1)) / (t*_m - t*_1).
Eigen::VectorXd endpoint_slope_vector(const Basis& basis, const TimeGrid& grid);

// The uniform weight 1/(hi - lo).
std::function<double(double)> uniform_weight(double lo, double hi);

}  // namespace wats
