#include "wats/basis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wats/quadrature.hpp"

namespace wats {

TimeGrid::TimeGrid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw SpecError("TimeGrid: need at least two design times");
  for (std::size_t j = 1; j < points_.size(); ++j) {
    if (!(points_[j] > points_[j - 1]))
      throw SpecError("TimeGrid: design times must be strictly increasing");
  }
}

int TimeGrid::index_of(double t) const {
  for (std::size_t j = 0; j < points_.size(); ++j) {
    if (points_[j] == t) return static_cast<int>(j);
  }
  return -1;
}

BasisSpec BasisSpec::polynomial(int degree, double lo, double hi) {
  BasisSpec s;
  s.kind = Kind::Polynomial;
  s.degree = degree;
  s.lo = lo;
  s.hi = hi;
  return s;
}

BasisSpec BasisSpec::cubic_bspline(std::vector<double> interior_knots, double lo, double hi) {
  BasisSpec s;
  s.kind = Kind::CubicBspline;
  s.interior_knots = std::move(interior_knots);
  s.lo = lo;
  s.hi = hi;
  std::sort(s.interior_knots.begin(), s.interior_knots.end());
  return s;
}

BasisSpec BasisSpec::default_bspline(double lo, double hi) {
  return cubic_bspline({0.5 * (lo + hi)}, lo, hi);
}

int BasisSpec::dimension() const {
  return kind == Kind::Polynomial ? degree + 1
                                  : 4 + static_cast<int>(interior_knots.size());
}

std::string BasisSpec::describe() const {
  std::ostringstream os;
  if (kind == Kind::Polynomial) {
    os << "polynomial(degree=" << degree << ")";
  } else {
    os << "cubic-bspline(knots=";
    for (std::size_t i = 0; i < interior_knots.size(); ++i)
      os << (i ? "," : "") << interior_knots[i];
    os << ")";
  }
  return os.str();
}

Basis::Basis(BasisSpec spec) : spec_(std::move(spec)), dim_(spec_.dimension()) {
  if (!(spec_.hi > spec_.lo)) throw SpecError("Basis: empty domain");
  breaks_ = {spec_.lo};
  if (spec_.kind == BasisSpec::Kind::Polynomial) {
    if (spec_.degree < 0) throw SpecError("Basis: negative polynomial degree");
  } else {
    for (double k : spec_.interior_knots) {
      if (!(k > spec_.lo && k < spec_.hi))
        throw SpecError("Basis: interior knot outside the open domain");
      breaks_.push_back(k);
    }
    // clamped cubic knot vector
    knots_.assign(4, spec_.lo);
    knots_.insert(knots_.end(), spec_.interior_knots.begin(), spec_.interior_knots.end());
    knots_.insert(knots_.end(), 4, spec_.hi);
  }
  breaks_.push_back(spec_.hi);
}

void Basis::check_domain(double t) const {
  constexpr double slack = 1e-12;
  if (t < spec_.lo - slack || t > spec_.hi + slack)
    throw DomainError("Basis: time outside the basis domain");
}

namespace {

// Nonzero B-spline values of the given degree at t, for the span starting at
// `span` (knots[span] <= t < knots[span+1]); the classical triangular scheme.
void bspline_nonzero(const std::vector<double>& knots, int span, double t, int degree,
                     double* out) {
  out[0] = 1.0;
  std::vector<double> left(degree + 1), right(degree + 1);
  for (int j = 1; j <= degree; ++j) {
    left[j] = t - knots[span + 1 - j];
    right[j] = knots[span + j] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      double temp = out[r] / (right[r + 1] + left[j - r]);
      out[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    out[j] = saved;
  }
}

int find_span(const std::vector<double>& knots, int dim, double t) {
  // spans run from index 3 to dim - 1; clamp the right endpoint into the last one
  if (t >= knots[dim]) return dim - 1;
  int span = 3;
  while (span < dim - 1 && t >= knots[span + 1]) ++span;
  return span;
}

}  // namespace

Eigen::VectorXd Basis::values(double t) const {
  check_domain(t);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dim_);
  if (spec_.kind == BasisSpec::Kind::Polynomial) {
    double v = 1.0;
    for (int j = 0; j < dim_; ++j) {
      g[j] = v;
      v *= t;
    }
    return g;
  }
  const int span = find_span(knots_, dim_, t);
  double n[4];
  bspline_nonzero(knots_, span, t, 3, n);
  for (int r = 0; r <= 3; ++r) g[span - 3 + r] = n[r];
  return g;
}

Eigen::VectorXd Basis::derivatives(double t) const {
  check_domain(t);
  Eigen::VectorXd d = Eigen::VectorXd::Zero(dim_);
  if (spec_.kind == BasisSpec::Kind::Polynomial) {
    double v = 1.0;
    for (int j = 1; j < dim_; ++j) {
      d[j] = j * v;
      v *= t;
    }
    return d;
  }
  // B'_{j,4} = 3 (N_{j,3}/(k_{j+3}-k_j) - N_{j+1,3}/(k_{j+4}-k_{j+1})), 0/0 -> 0
  const int span = find_span(knots_, dim_, t);
  double n2[3];
  bspline_nonzero(knots_, span, t, 2, n2);
  auto quad_value = [&](int j) -> double {  // N_{j,3} at t; nonzero for span-2..span
    int r = j - (span - 2);
    return (r >= 0 && r <= 2) ? n2[r] : 0.0;
  };
  for (int j = span - 3; j <= span; ++j) {
    double left = 0.0, right = 0.0;
    double dl = knots_[j + 3] - knots_[j];
    double dr = knots_[j + 4] - knots_[j + 1];
    if (dl > 0.0) left = quad_value(j) / dl;
    if (dr > 0.0) right = quad_value(j + 1) / dr;
    d[j] = 3.0 * (left - right);
  }
  return d;
}

Eigen::MatrixXd eval_design(const Basis& basis, std::span<const double> times) {
  Eigen::MatrixXd X(static_cast<int>(times.size()), basis.dim());
  for (std::size_t i = 0; i < times.size(); ++i) X.row(i) = basis.values(times[i]).transpose();
  return X;
}

Eigen::VectorXd weighted_slope_integral(const Basis& basis,
                                        const std::function<double(double)>& weight) {
  return integrate_panels(
      [&](double t) -> Eigen::VectorXd { return basis.derivatives(t) * weight(t); },
      basis.segment_breaks());
}

Eigen::VectorXd endpoint_slope_vector(const Basis& basis, const TimeGrid& grid) {
  return (basis.values(grid.last()) - basis.values(grid.first())) / (grid.last() - grid.first());
}

std::function<double(double)> uniform_weight(double lo, double hi) {
  const double w = 1.0 / (hi - lo);
  return [w](double) { return w; };
}

}  // namespace wats
